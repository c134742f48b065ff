"""Truncated POD bases from snapshot matrices.

Snapshots are stored with one spatial degree of freedom per row and one time
instant per column.  Vector-valued fields (for example u and v velocity) are
stacked component-wise: component ``j`` occupies the contiguous row block
``[j * n/s, (j + 1) * n/s)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg

__all__ = [
    "SnapshotMatrix",
    "PODBasis",
    "compute_pod",
    "component_block",
    "mode_amplitudes",
]


@dataclass(frozen=True)
class SnapshotMatrix:
    """Stacked snapshot data: ``components * dof_per_component`` rows, N columns."""

    data: np.ndarray
    components: int = 1

    def __post_init__(self):
        data = linalg.as_matrix(self.data, name="snapshot data")
        object.__setattr__(self, "data", data)
        if self.components < 1:
            raise ValueError("components must be >= 1")
        if data.shape[0] % self.components != 0:
            raise ValueError(
                f"{data.shape[0]} rows not divisible by {self.components} components"
            )

    @property
    def n_dof(self) -> int:
        return self.data.shape[0]

    @property
    def n_snapshots(self) -> int:
        return self.data.shape[1]

    @property
    def dof_per_component(self) -> int:
        return self.data.shape[0] // self.components


@dataclass(frozen=True)
class PODBasis:
    """Orthonormal spatial modes (n x r), singular values and the removed mean.

    ``mean`` is the temporal mean subtracted from the snapshots before the
    SVD (all zeros when centering was disabled); it is kept so observations
    and reconstructions use the same offset convention.
    """

    modes: np.ndarray
    singular_values: np.ndarray
    components: int = 1
    mean: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        modes = linalg.as_matrix(self.modes, name="modes")
        sigma = np.asarray(self.singular_values, dtype=np.float64).ravel()
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "singular_values", sigma)
        if self.components < 1:
            raise ValueError("components must be >= 1")
        n, r = modes.shape
        if n % self.components != 0:
            raise ValueError(f"{n} rows not divisible by {self.components} components")
        if sigma.size != r:
            raise ValueError(f"expected {r} singular values, got {sigma.size}")
        if np.any(sigma < 0) or np.any(np.diff(sigma) > 0):
            raise ValueError("singular values must be non-negative and non-increasing")
        gram = modes.T @ modes
        if np.max(np.abs(gram - np.eye(r))) > 1e-10:
            raise ValueError("mode columns are not orthonormal")
        if self.mean is None:
            object.__setattr__(self, "mean", np.zeros(n))
        else:
            mean = np.asarray(self.mean, dtype=np.float64).ravel()
            if mean.size != n:
                raise ValueError(f"mean has length {mean.size}, expected {n}")
            object.__setattr__(self, "mean", mean)

    @property
    def rank(self) -> int:
        return self.modes.shape[1]

    @property
    def n_dof(self) -> int:
        return self.modes.shape[0]

    @property
    def dof_per_component(self) -> int:
        return self.modes.shape[0] // self.components


def compute_pod(snapshots: SnapshotMatrix, rank: int, center: bool = True) -> PODBasis:
    """Truncated POD of a snapshot matrix.

    Parameters
    ----------
    snapshots : SnapshotMatrix
    rank : int
        Number of modes to keep; must satisfy ``1 <= rank <= min(n, N)``.
        Requests beyond the number of snapshots are rejected rather than
        silently truncated.
    center : bool
        Subtract the temporal mean of each row before the SVD (default).
        The subtracted mean is stored on the returned basis.
    """
    data = snapshots.data
    n, n_snap = data.shape
    if not 1 <= rank <= min(n, n_snap):
        raise ValueError(
            f"rank {rank} out of range for {n} dof and {n_snap} snapshots"
        )
    if center:
        mean = data.mean(axis=1)
        data = data - mean[:, None]
    else:
        mean = np.zeros(n)
    modes, sigma, _ = linalg.thin_svd(data, rank)
    return PODBasis(
        modes=modes,
        singular_values=sigma,
        components=snapshots.components,
        mean=mean,
    )


def component_block(basis: PODBasis, component: int) -> np.ndarray:
    """Row block of ``basis.modes`` for one vector component (0-based index)."""
    if not 0 <= component < basis.components:
        raise ValueError(
            f"component {component} out of range for {basis.components} components"
        )
    dof = basis.dof_per_component
    return basis.modes[component * dof : (component + 1) * dof]


def mode_amplitudes(basis: PODBasis, snapshots: SnapshotMatrix) -> np.ndarray:
    """Project (mean-subtracted) snapshots onto the basis.

    Returns the r x N amplitude matrix whose column ``t`` holds the true mode
    amplitudes of snapshot ``t``.
    """
    if snapshots.n_dof != basis.n_dof or snapshots.components != basis.components:
        raise ValueError(
            f"snapshots ({snapshots.n_dof} dof, {snapshots.components} components) do not "
            f"match basis ({basis.n_dof} dof, {basis.components} components)"
        )
    return basis.modes.T @ (snapshots.data - basis.mean[:, None])
