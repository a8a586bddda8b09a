"""
Simulation Traces
=================

Immutable containers for simulation output and their conversion to
xarray, CSV and Zarr.

Authors: ContainPy Development Team
Version: 0.1.0
"""

import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
import xarray as xr
from numcodecs.zarr3 import Zstd

from ..core.utils import SOFTWARE_VERSION, utc_timestamp


def _json_attr(value):
    """xarray attrs must be netCDF-friendly scalars, strings or flat lists."""
    if isinstance(value, np.ndarray):
        return value.ravel().tolist()
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if value is None:
        return "none"
    return value


# =============================================================================
# TRACES
# =============================================================================

@dataclass(frozen=True, eq=False)
class ContainmentTrace:
    """
    Sampled closed-loop trajectories of one run.

    Arrays are indexed (sample, follower, component) or (sample, leader,
    component). ``tracking_error`` is the distance of the follower stack to
    its containment target -L2^{-1} L1 x_L, which keeps decaying after the
    followers are inside the hull.
    """

    controller: str
    domain: str
    times: np.ndarray
    positions: np.ndarray
    leader_positions: np.ndarray
    hull_distances: np.ndarray
    containment_error: np.ndarray
    tracking_error: np.ndarray
    estimator_error: Optional[np.ndarray] = None
    inputs: Optional[np.ndarray] = None
    headings: Optional[np.ndarray] = None
    wheel_commands: Optional[np.ndarray] = None
    attrs: Dict[str, Any] = field(default_factory=dict)

    @property
    def num_followers(self) -> int:
        return self.positions.shape[1]

    @property
    def num_leaders(self) -> int:
        return self.leader_positions.shape[1]

    @property
    def dimension(self) -> int:
        return self.positions.shape[2]

    def final_ratio(self) -> float:
        """E_r at the last sample over E_r at the first (0 when both vanish)."""
        start, end = float(self.containment_error[0]), float(self.containment_error[-1])
        if start == 0.0:
            return 0.0 if end == 0.0 else np.inf
        return end / start

    def to_dataset(self) -> xr.Dataset:
        """Convert to an ``xarray.Dataset`` with dims time/follower/leader/component."""
        comp = np.arange(1, self.dimension + 1)
        followers = np.arange(self.num_leaders + 1, self.num_leaders + self.num_followers + 1)
        leaders = np.arange(1, self.num_leaders + 1)
        units = "s" if self.domain == "continuous" else "step"

        data_vars = {
            "position": (("time", "follower", "component"), self.positions,
                         {"long_name": "follower position"}),
            "leader_position": (("time", "leader", "component"), self.leader_positions,
                                {"long_name": "leader position"}),
            "hull_distance": (("time", "follower"), self.hull_distances,
                              {"long_name": "distance to the leaders' convex hull"}),
            "containment_error": (("time",), self.containment_error,
                                  {"long_name": "sum of follower hull distances"}),
            "tracking_error": (("time",), self.tracking_error,
                               {"long_name": "distance to the containment target"}),
        }
        if self.estimator_error is not None:
            data_vars["estimator_error"] = (("time",), self.estimator_error,
                                            {"long_name": "norm of the estimator error"})
        if self.inputs is not None:
            data_vars["control_input"] = (("time", "follower", "component"), self.inputs,
                                          {"long_name": "applied control input"})
        if self.headings is not None:
            data_vars["heading"] = (("time", "follower"), self.headings,
                                    {"long_name": "robot heading", "units": "rad"})
        if self.wheel_commands is not None:
            data_vars["linear_velocity"] = (("time", "follower"), self.wheel_commands[..., 0],
                                            {"long_name": "linear velocity command"})
            data_vars["angular_velocity"] = (("time", "follower"), self.wheel_commands[..., 1],
                                             {"long_name": "angular velocity command"})

        attrs = {
            "title": "Containment control trace",
            "controller": self.controller,
            "time_domain": self.domain,
            "processing_software": f"ContainPy v{SOFTWARE_VERSION}",
            "date_created": utc_timestamp(),
        }
        attrs.update({k: _json_attr(v) for k, v in self.attrs.items()})
        return xr.Dataset(
            data_vars,
            coords={
                "time": ("time", self.times, {"long_name": "time", "units": units}),
                "follower": ("follower", followers),
                "leader": ("leader", leaders),
                "component": ("component", comp),
            },
            attrs=attrs,
        )

    def to_dataframe(self) -> pd.DataFrame:
        """
        Long table with one row per (sample, agent).

        Columns: t, agent, role, x1..xp, hull_distance, E_r, estimator_error
        and, for robot runs, v and omega.
        """
        T, N, p = self.positions.shape
        M = self.num_leaders
        frames = []
        for role, pos, ids in (
            ("leader", self.leader_positions, np.arange(1, M + 1)),
            ("follower", self.positions, np.arange(M + 1, M + N + 1)),
        ):
            count = pos.shape[1]
            table = {
                "t": np.repeat(self.times, count),
                "agent": np.tile(ids, T),
                "role": role,
            }
            for c in range(p):
                table[f"x{c + 1}"] = pos[:, :, c].ravel()
            if role == "follower":
                table["hull_distance"] = self.hull_distances.ravel()
            else:
                table["hull_distance"] = 0.0
            table["E_r"] = np.repeat(self.containment_error, count)
            table["estimator_error"] = (
                np.repeat(self.estimator_error, count) if self.estimator_error is not None else np.nan
            )
            if self.wheel_commands is not None:
                if role == "follower":
                    table["v"] = self.wheel_commands[..., 0].ravel()
                    table["omega"] = self.wheel_commands[..., 1].ravel()
                else:
                    table["v"] = np.nan
                    table["omega"] = np.nan
            frames.append(pd.DataFrame(table))
        return pd.concat(frames, ignore_index=True).sort_values(["t", "agent"], kind="stable").reset_index(drop=True)

    def to_csv(self, path: str) -> str:
        """Write :meth:`to_dataframe` to CSV and return the path."""
        folder = os.path.dirname(path)
        if folder:
            os.makedirs(folder, exist_ok=True)
        self.to_dataframe().to_csv(path, index=False)
        return path


@dataclass(frozen=True, eq=False)
class LiftedTrace:
    """
    Samples of the shifted lifted state Xi_hat_F.

    ``xi_hat`` is (sample, follower, lifted order, component); ``positions``
    are the follower positions recovered from its first lifted component.
    """

    domain: str
    times: np.ndarray
    xi_hat: np.ndarray
    positions: np.ndarray

    @property
    def norms(self) -> np.ndarray:
        T = self.xi_hat.shape[0]
        return np.linalg.norm(self.xi_hat.reshape(T, -1), axis=1)


@dataclass(frozen=True, eq=False)
class MonteCarloReport:
    """
    Ensemble statistics of a noisy discrete run.

    All per-sample arrays are (sample, follower). ``mean_position_distance``
    is the hull distance of the ensemble-mean follower position.
    """

    controller: str
    times: np.ndarray
    num_runs: int
    mean_distance: np.ndarray
    second_moment: np.ndarray
    std_distance: np.ndarray
    mean_position_distance: np.ndarray
    mean_converged: bool
    second_moment_bounded: bool
    head_second_moment: float
    tail_second_moment: float
    seed: int
    traces: List[ContainmentTrace] = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        return self.mean_converged and self.second_moment_bounded

    def to_dict(self) -> dict:
        """JSON-ready summary with per-step mean and second moment."""
        return {
            "controller": self.controller,
            "num_runs": self.num_runs,
            "seed": self.seed,
            "times": self.times.tolist(),
            "mean_distance": self.mean_distance.tolist(),
            "second_moment": self.second_moment.tolist(),
            "std_distance": self.std_distance.tolist(),
            "mean_position_distance": self.mean_position_distance.tolist(),
            "mean_converged": self.mean_converged,
            "second_moment_bounded": self.second_moment_bounded,
            "head_second_moment": self.head_second_moment,
            "tail_second_moment": self.tail_second_moment,
        }

    def to_dataset(self) -> xr.Dataset:
        N = self.mean_distance.shape[1]
        dims = ("time", "follower")
        return xr.Dataset(
            {
                "mean_distance": (dims, self.mean_distance),
                "second_moment": (dims, self.second_moment),
                "std_distance": (dims, self.std_distance),
                "mean_position_distance": (dims, self.mean_position_distance),
            },
            coords={"time": self.times, "follower": np.arange(1, N + 1)},
            attrs={
                "title": "Containment Monte Carlo statistics",
                "controller": self.controller,
                "num_runs": self.num_runs,
                "seed": self.seed,
                "processing_software": f"ContainPy v{SOFTWARE_VERSION}",
                "date_created": utc_timestamp(),
            },
        )


# =============================================================================
# PERSISTENCE
# =============================================================================

def save_trace_zarr(
    ds: xr.Dataset,
    output_folder: str,
    file_name: str,
    time_chunk: int = 1024,
    compression_level: int = 3,
) -> str:
    """
    Save a trace dataset as a Zstd-compressed Zarr store.

    Parameters
    ----------
    ds : xr.Dataset
        Output of ``ContainmentTrace.to_dataset`` or
        ``MonteCarloReport.to_dataset``.
    output_folder : str
        Directory for the store.
    file_name : str
        Store name without the ``.zarr`` extension.
    time_chunk : int
        Chunk length along the time dimension; other dims are unchunked.

    Returns
    -------
    str
        Path of the written store.
    """
    if not output_folder:
        raise ValueError("Output folder must be provided.")
    os.makedirs(output_folder, exist_ok=True)
    zarr_path = os.path.join(output_folder, f"{file_name}.zarr")

    compressor = Zstd(level=compression_level)
    encoding = {}
    for var in ds.data_vars:
        shape = ds[var].shape
        chunks: Tuple[int, ...] = tuple(
            min(time_chunk, s) if dim == "time" else s
            for dim, s in zip(ds[var].dims, shape)
        )
        encoding[var] = {
            'compressors': (compressor,),
            'chunks': chunks,
        }
    ds.to_zarr(zarr_path, mode='w', encoding=encoding)
    return zarr_path


def load_trace_zarr(zarr_path: str) -> xr.Dataset:
    """Open a trace store written by :func:`save_trace_zarr`."""
    return xr.open_zarr(zarr_path)
