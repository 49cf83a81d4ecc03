"""Scikit-learn style wrapper around the frequency-sweep shape descent."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .inverse import MeasurementSet, Scenario, ShapeParams, descend, forward_map


class ObstacleReconstructor(BaseEstimator):
    """Reconstruct star-shaped inclusions from near-field measurements.

    Parameters
    ----------
    scenario : Scenario
        Materials, outer radius, frequencies, directions and mesh size.
    initial_centers : sequence of (float, float)
        One center per inclusion for the circular initial guesses.
    initial_radius : float
        Radius of the initial circles.
    order : int
        Number of Fourier modes M of each radius function.
    iterations : int
        Descent steps per incident direction and frequency.
    step_factor : float
        Step size is ``step_factor / k_p`` at each frequency.
    method : {"transmission", "domain"}
        How the shape derivative is computed.
    backtrack : bool
        Halve steps that increase the objective.
    """

    def __init__(self, scenario: Scenario | None = None, initial_centers=((0.0, 0.0),), initial_radius=0.5, order=10, iterations=10, step_factor=0.005, method="transmission", backtrack=False):
        self.scenario = scenario
        self.initial_centers = initial_centers
        self.initial_radius = initial_radius
        self.order = order
        self.iterations = iterations
        self.step_factor = step_factor
        self.method = method
        self.backtrack = backtrack

    def _check_data(self, X):
        if not isinstance(X, MeasurementSet):
            raise TypeError("X must be a MeasurementSet")
        sc = self.scenario
        if sc is None:
            raise ValueError("scenario is required")
        if tuple(X.frequencies) != sc.frequencies or tuple(X.directions) != sc.directions:
            raise ValueError("measurement frequencies/directions differ from the scenario")
        if len(X.theta) != sc.n_meas or not np.allclose(X.theta, sc.meas_angles()) or X.radius != sc.radius:
            raise ValueError("measurement points differ from the scenario")
        return X

    def fit(self, X: MeasurementSet, y=None, log=None):
        """Run the descent from circular initial guesses; ``y`` is ignored."""
        X = self._check_data(X)
        if len(self.initial_centers) != len(self.scenario.inclusions):
            raise ValueError("need one initial center per inclusion")
        if self.method not in ("transmission", "domain"):
            raise ValueError(f"unknown method {self.method!r}")
        init = ShapeParams.circles(self.initial_centers, self.initial_radius, self.order)
        res = descend(init, X, self.scenario, self.iterations, self.step_factor, self.method, log=log, backtrack=self.backtrack)
        self.shape_ = res.shape
        self.curves_ = res.shape.curves()
        self.rerror_ = np.asarray(res.rerror)
        self.records_ = res.records
        self.aborted_stages_ = res.aborted_stages
        self.n_iter_ = len(res.records)
        return self

    def _check_fitted(self):
        if not hasattr(self, "shape_"):
            raise NotFittedError("ObstacleReconstructor is not fitted yet")

    def predict(self, X: MeasurementSet | None = None) -> MeasurementSet:
        """Simulated measurements of the reconstructed inclusions."""
        self._check_fitted()
        if X is not None:
            self._check_data(X)
        return forward_map(self.shape_, self.scenario)

    def score(self, X: MeasurementSet, y=None):
        """Negative relative residual, so larger is better."""
        sim = self.predict(X)
        return -float(np.linalg.norm(sim.values - X.values) / X.norm())
