"""scikit-learn style estimators for K-MinMax and K-MinSum clustering."""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from ._errors import ConfigError
from .distance import DistanceMatrix, _METRICS, build_matrix, from_points
from .engine import span_objective
from .pipeline import RunConfig, execute, resolve

__all__ = ["KMinMax", "KMinSum"]


class _PseudoCentroidBase(ClusterMixin, TransformerMixin, BaseEstimator):
    _algorithm = "kminmax"

    def _weight(self) -> float:
        return 0.0

    def _config(self, n: int) -> RunConfig:
        extra = dict(self.start_params or {})
        names = {f.name for f in dataclasses.fields(RunConfig)}
        owned = {"algorithm", "k", "p", "start", "metric", "multi_centroid", "reassign_all", "objective",
                 "termination", "max_iterations", "accelerated", "variant", "rng_seed", "input", "output", "format"}
        bad = sorted(set(extra) - (names - owned))
        if bad:
            raise ConfigError(f"start_params has unsupported keys: {', '.join(bad)}")
        seed = self.random_state if isinstance(self.random_state, (int, np.integer)) else 0
        cfg = RunConfig(
            algorithm=self._algorithm,
            k=self.n_clusters,
            p=self._weight(),
            start=self.start,
            multi_centroid=self.multi_centroid,
            reassign_all=self.reassign_all,
            objective=self.objective,
            termination=self.termination,
            max_iterations=self.max_iter,
            accelerated=self.accelerated,
            variant=self.variant,
            rng_seed=int(seed),
            **extra,
        )
        return resolve(cfg, n)

    def _matrix(self, X):
        """Validated ``(matrix, coordinates or None)`` for ``fit``."""
        if isinstance(X, DistanceMatrix):
            if self.metric != "precomputed":
                raise ConfigError("a DistanceMatrix input needs metric='precomputed'")
            self.n_features_in_ = X.n
            return X, None
        X = validate_data(self, X, dtype="numeric")
        if self.metric == "precomputed":
            return build_matrix(X), None
        X = X.astype(float, copy=False)
        return from_points(X, self.metric), X

    def fit(self, X, y=None):
        """Cluster ``X``.

        Parameters
        ----------
        X : array-like of shape (n, n) or (n, dim), or DistanceMatrix
            Distances when ``metric="precomputed"``, coordinates otherwise.
        y : ignored

        Returns
        -------
        self
        """
        m, coords = self._matrix(X)
        out = execute(self._config(m.n), m)
        final = out.report.final
        self.report_ = out.report
        self.outcome_ = out
        self.labels_ = np.asarray(final.labels, dtype=np.intp)
        self.centroid_indices_ = np.array([c.centroid for c in final.clusters], dtype=np.intp)
        self.spans_ = np.array([c.span for c in final.clusters])
        self.objective_ = span_objective(final, self.objective)
        self.n_iter_ = out.report.iterations
        self.value_ = out.quality.value if out.quality is not None else None
        self.cluster_centers_ = None if coords is None else coords[self.centroid_indices_]
        return self

    def transform(self, X):
        """Distances from each row of ``X`` to the fitted centroids.

        With ``metric="precomputed"``, ``X`` holds distances from new points
        to the training points, shape (n_new, n_train).
        """
        check_is_fitted(self, "centroid_indices_")
        X = validate_data(self, X, dtype="numeric", reset=False)
        if self.metric == "precomputed":
            return X[:, self.centroid_indices_]
        return cdist(X.astype(float, copy=False), self.cluster_centers_, metric=_METRICS[self.metric])

    def predict(self, X):
        """Index of the nearest centroid for each row (lowest index on ties)."""
        return np.argmin(self.transform(X), axis=1).astype(np.intp)

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_


class KMinMax(_PseudoCentroidBase):
    """Pseudo-centroid clustering that minimises the largest member distance.

    Each cluster is represented by the member whose farthest fellow member
    is nearest (its span).  Points are reassigned to the closest centroid
    until the centroid sets stop changing.

    Parameters
    ----------
    n_clusters : int, default=2
    start : str, default="primary"
        Start method; see ``pipeline.START_METHODS``.
    metric : str, default="precomputed"
        ``"precomputed"`` or a coordinate metric (``euclidean``,
        ``squared_euclidean``, ``manhattan``).
    multi_centroid : bool, default=False
        Assign against every tied centroid of a cluster.
    reassign_all : bool, default=False
        Allow centroids themselves to move clusters.
    objective : str, default="span_sum"
    termination : {"fixed_point", "objective_local_min"}, default="fixed_point"
    max_iter : int, default=100
    accelerated : bool, default=False
        Incremental centroid updates after each assignment.
    variant : {"plain", "regret", "restart"}, default="plain"
    start_params : dict, optional
        Extra :class:`RunConfig` options (``lam``, ``seeds``, ``F``, ...).
    random_state : int, optional
        Seeds the random start point and random rules.

    Attributes
    ----------
    labels_ : ndarray of shape (n,)
    centroid_indices_ : ndarray of shape (k,)
    cluster_centers_ : ndarray or None
        Centroid coordinates; None for precomputed input.
    spans_ : ndarray of shape (k,)
    objective_ : float
    n_iter_ : int
    value_ : float or None
        Margin-based quality value (None for a single cluster).
    report_ : RunReport

    Examples
    --------
    >>> import numpy as np
    >>> d = np.array([[0, 1, 3, 7], [1, 0, 2, 6], [3, 2, 0, 4], [7, 6, 4, 0]])
    >>> KMinMax(n_clusters=2).fit(d).labels_.tolist()
    [0, 0, 1, 1]
    """

    _algorithm = "kminmax"

    def __init__(
        self,
        n_clusters=2,
        start="primary",
        metric="precomputed",
        multi_centroid=False,
        reassign_all=False,
        objective="span_sum",
        termination="fixed_point",
        max_iter=100,
        accelerated=False,
        variant="plain",
        start_params=None,
        random_state=None,
    ):
        self.n_clusters = n_clusters
        self.start = start
        self.metric = metric
        self.multi_centroid = multi_centroid
        self.reassign_all = reassign_all
        self.objective = objective
        self.termination = termination
        self.max_iter = max_iter
        self.accelerated = accelerated
        self.variant = variant
        self.start_params = start_params
        self.random_state = random_state


class KMinSum(_PseudoCentroidBase):
    """Pseudo-centroid clustering that minimises the summed member distance.

    Same interface as :class:`KMinMax` plus ``weight``: distances are raised
    to ``1 + weight`` before summing, so larger weights push the centroid
    choice towards the MinMax one.
    """

    _algorithm = "kminsum"

    def __init__(
        self,
        n_clusters=2,
        start="primary",
        metric="precomputed",
        weight=0.0,
        multi_centroid=False,
        reassign_all=False,
        objective="span_sum",
        termination="fixed_point",
        max_iter=100,
        accelerated=False,
        variant="plain",
        start_params=None,
        random_state=None,
    ):
        self.n_clusters = n_clusters
        self.start = start
        self.metric = metric
        self.weight = weight
        self.multi_centroid = multi_centroid
        self.reassign_all = reassign_all
        self.objective = objective
        self.termination = termination
        self.max_iter = max_iter
        self.accelerated = accelerated
        self.variant = variant
        self.start_params = start_params
        self.random_state = random_state

    def _weight(self) -> float:
        return float(self.weight)
