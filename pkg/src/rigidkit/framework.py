"""Formation frameworks: a sensing graph plus a reference configuration.

Node indices are 0-based everywhere in code. Scenario files use 1-based
node numbering; :func:`load_scenario` and :func:`save_scenario` convert.
Edges are kept in canonical order (each pair as ``(i, j)`` with ``i < j``,
the list sorted lexicographically), which fixes the row order of every
edge-indexed vector and matrix derived from a framework.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .jsonio import dumps_json, load_json

__all__ = [
    "Framework",
    "Scenario",
    "SimSettings",
    "ToleranceOverrides",
    "ValidationError",
    "ScenarioParseError",
    "load_scenario",
    "save_scenario",
    "scenario_to_dict",
    "edge_vector",
    "block",
]


class ValidationError(ValueError):
    """An invariant of a framework or scenario does not hold."""


class ScenarioParseError(ValueError):
    """A scenario file is malformed or does not match the schema."""


def _canonical_edges(edges, n: int) -> tuple[tuple[int, int], ...]:
    """Reorder pairs to i < j, sort lexicographically, reject bad input."""
    out = []
    for e in edges:
        pair = tuple(int(x) for x in e)
        if len(pair) != 2:
            raise ValidationError(f"edges: expected a pair, got {list(e)!r}")
        i, j = pair
        if i == j:
            raise ValidationError(f"edges: self-loop at node {i}")
        if not (0 <= i < n) or not (0 <= j < n):
            raise ValidationError(f"edges: node index out of range in ({i}, {j})")
        out.append((min(i, j), max(i, j)))
    out.sort()
    for a, b in zip(out, out[1:]):
        if a == b:
            raise ValidationError(f"edges: duplicate edge {a}")
    return tuple(out)


@dataclass(frozen=True)
class Framework:
    """Undirected graph with a stacked reference configuration in R^(n*d).

    ``positions`` stacks agent coordinates agent-by-agent, so agent ``k``
    occupies entries ``k*d : (k+1)*d``. Instances are immutable after
    construction and safe to share between concurrent runs.
    """

    n: int
    d: int
    edges: tuple[tuple[int, int], ...]
    positions: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"n: must be at least 1, got {self.n}")
        if self.d < 2:
            raise ValidationError(f"d: ambient dimension must be at least 2, got {self.d}")
        pos = np.array(self.positions, dtype=float).ravel()
        if pos.size != self.n * self.d:
            raise ValidationError(
                f"positions length: expected {self.n * self.d} entries, got {pos.size}"
            )
        if not np.all(np.isfinite(pos)):
            raise ValidationError("positions: entries must be finite")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "edges", _canonical_edges(self.edges, self.n))
        pts = self.points
        for i, j in self.edges:
            if np.array_equal(pts[i], pts[j]):
                raise ValidationError(f"edges: zero-length edge ({i}, {j})")

    @classmethod
    def from_points(cls, points, edges) -> "Framework":
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2:
            raise ValidationError("positions: expected an (n, d) array of points")
        return cls(n=pts.shape[0], d=pts.shape[1], edges=tuple(edges), positions=pts.ravel())

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def points(self) -> np.ndarray:
        return self.positions.reshape(self.n, self.d)

    def neighbors(self, node: int) -> tuple[int, ...]:
        if not (0 <= node < self.n):
            raise IndexError(f"node index {node} out of range for n={self.n}")
        out = []
        for i, j in self.edges:
            if i == node:
                out.append(j)
            elif j == node:
                out.append(i)
        return tuple(sorted(out))

    def is_complete(self) -> bool:
        return self.m == self.n * (self.n - 1) // 2

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.n}:{self.d}:{self.edges}".encode())
        h.update(self.positions.tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class SimSettings:
    """Fixed-step integrator settings."""

    dt: float = 1e-3
    t_end: float = 50.0
    method: str = "rk4"  # "rk4" | "euler"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValidationError(f"sim.dt: step size must be positive, got {self.dt}")
        if not self.t_end > 0:
            raise ValidationError(f"sim.t_end: horizon must be positive, got {self.t_end}")
        if self.method not in ("rk4", "euler"):
            raise ValidationError(f"sim.method: expected 'rk4' or 'euler', got {self.method!r}")


@dataclass(frozen=True)
class ToleranceOverrides:
    """Optional overrides for the rank and subspace comparison tolerances."""

    rank: float | None = None
    subspace: float | None = None

    def __post_init__(self):
        if self.rank is not None and not self.rank > 0:
            raise ValidationError(f"tol.rank: must be positive, got {self.rank}")
        if self.subspace is not None and not self.subspace > 0:
            raise ValidationError(f"tol.subspace: must be positive, got {self.subspace}")


@dataclass(frozen=True)
class Scenario:
    """A framework plus the actuation, measurement and simulation choices."""

    framework: Framework
    actuator: int
    sensor: int
    w0: np.ndarray
    impulse: float = 1.0
    sim: SimSettings = SimSettings()
    tol: ToleranceOverrides = ToleranceOverrides()

    def __post_init__(self):
        fw = self.framework
        if not (0 <= self.actuator < fw.n):
            raise ValidationError(f"actuator: node index {self.actuator} out of range")
        if not (0 <= self.sensor < fw.n):
            raise ValidationError(f"sensor: node index {self.sensor} out of range")
        w = np.array(self.w0, dtype=float).ravel()
        if w.size != fw.d:
            raise ValidationError(f"w0: expected {fw.d} entries, got {w.size}")
        if not np.all(np.isfinite(w)):
            raise ValidationError("w0: entries must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "w0", w)
        if not self.impulse > 0:
            raise ValidationError(f"impulse: must be positive, got {self.impulse}")


def _require(data: dict, key: str):
    if key not in data:
        raise ScenarioParseError(f"missing key {key!r} in scenario file")
    return data[key]


def load_scenario(path) -> Scenario:
    """Load and validate a scenario file (JSON, 1-based node indices)."""
    try:
        data = load_json(path)
    except FileNotFoundError:
        raise
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ScenarioParseError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioParseError("scenario file must hold a JSON object")

    try:
        n = int(_require(data, "n"))
        d = int(_require(data, "d"))
        raw_edges = _require(data, "edges")
        raw_positions = _require(data, "positions")
        actuator = int(_require(data, "actuator"))
        sensor = int(_require(data, "sensor"))
        w0 = _require(data, "w0")
    except (TypeError, ValueError) as exc:
        raise ScenarioParseError(f"bad scalar field in scenario file: {exc}") from exc

    edges = []
    for e in raw_edges:
        pair = [int(x) for x in e]
        if len(pair) != 2:
            raise ScenarioParseError(f"edges: expected [i, j] pairs, got {e!r}")
        for x in pair:
            if not (1 <= x <= n):
                raise ValidationError(f"edges: node index {x} out of range [1, {n}]")
        edges.append((pair[0] - 1, pair[1] - 1))

    try:
        positions = np.asarray(raw_positions, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"positions length: expected {n} rows of {d} floats ({exc})") from exc
    if positions.ndim != 2 or positions.shape != (n, d):
        raise ValidationError(
            f"positions length: expected {n} rows of {d} floats, "
            f"got shape {positions.shape}"
        )
    for node, name in ((actuator, "actuator"), (sensor, "sensor")):
        if not (1 <= node <= n):
            raise ValidationError(f"{name}: node index {node} out of range [1, {n}]")

    sim_data = data.get("sim", {}) or {}
    sim = SimSettings(
        dt=float(sim_data.get("dt", SimSettings.dt)),
        t_end=float(sim_data.get("t_end", SimSettings.t_end)),
        method=str(sim_data.get("method", SimSettings.method)),
    )
    tol_data = data.get("tol", {}) or {}
    tol = ToleranceOverrides(
        rank=None if tol_data.get("rank") is None else float(tol_data["rank"]),
        subspace=None if tol_data.get("subspace") is None else float(tol_data["subspace"]),
    )

    framework = Framework(n=n, d=d, edges=tuple(edges), positions=positions.ravel())
    return Scenario(
        framework=framework,
        actuator=actuator - 1,
        sensor=sensor - 1,
        w0=np.asarray(w0, dtype=float),
        impulse=float(data.get("impulse", 1.0)),
        sim=sim,
        tol=tol,
    )


def scenario_to_dict(scenario: Scenario) -> dict:
    """Canonical file representation of a scenario (1-based node indices)."""
    fw = scenario.framework
    tol = {}
    if scenario.tol.rank is not None:
        tol["rank"] = scenario.tol.rank
    if scenario.tol.subspace is not None:
        tol["subspace"] = scenario.tol.subspace
    return {
        "n": fw.n,
        "d": fw.d,
        "edges": [[i + 1, j + 1] for i, j in fw.edges],
        "positions": [list(row) for row in fw.points],
        "actuator": scenario.actuator + 1,
        "sensor": scenario.sensor + 1,
        "w0": list(scenario.w0),
        "impulse": scenario.impulse,
        "sim": {
            "dt": scenario.sim.dt,
            "t_end": scenario.sim.t_end,
            "method": scenario.sim.method,
        },
        "tol": tol,
    }


def save_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(dumps_json(scenario_to_dict(scenario)), encoding="utf-8")


def block(v, node: int, d: int) -> np.ndarray:
    """Entries of agent ``node`` inside a stacked vector of d-blocks."""
    vec = np.asarray(v, dtype=float).ravel()
    if d < 1 or vec.size % d != 0:
        raise ValidationError(f"block: vector of length {vec.size} is not a stack of {d}-blocks")
    n = vec.size // d
    if not (0 <= node < n):
        raise IndexError(f"block: node index {node} out of range for n={n}")
    return vec[node * d : (node + 1) * d]


def edge_vector(fw: Framework, k: int) -> np.ndarray:
    """Relative position p_i - p_j for edge k = (i, j) in canonical orientation."""
    if not (0 <= k < fw.m):
        raise IndexError(f"edge index {k} out of range for m={fw.m}")
    i, j = fw.edges[k]
    pts = fw.points
    return pts[i] - pts[j]
