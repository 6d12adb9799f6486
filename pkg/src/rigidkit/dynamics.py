"""Gradient-flow and linearized simulations, impulse steady states, and the
shape-recovery analysis.

The nonlinear closed loop descends the squared-edge-length error potential;
the linearized model evolves a deviation state under the stiffness matrix.
An impulsive input enters the linear model as an instantaneous state jump
(exact for an LTI system), and its steady state is the projection of that
jump onto the flex space. Whether the formation recovers its shape is
decided by the alignment of the input direction with the rotational
rigid-body mode's local velocity at the actuated node.

The recovery/distortion verdict is a first-order statement and is produced
from the linearized model; a nonlinear comparison run is available behind
a flag and reported without being asserted against.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .framework import Framework, Scenario, SimSettings, ValidationError, block
from .modes import LinearizedSystem, linearize
from .rigidity import (
    FLEXIBLE,
    RbmBasis,
    classify_rigidity,
    flex_space,
    rbm_basis,
    rigidity_function,
    rigidity_matrix,
    rotation_2d,
)
from .subspaces import DEFAULT_TOL, project

TAIL_FRACTION = 0.05

__all__ = [
    "NumericalError",
    "Trajectory",
    "EdgeErrorSeries",
    "ImpulseOutcome",
    "ControllablePlane",
    "simulate_nonlinear",
    "simulate_lti",
    "steady_state",
    "rbm_coefficients",
    "rbm_motion_from_coords",
    "shape_recovery_experiment",
    "controllable_plane",
    "edge_error_series",
    "sweep_impulse_angles",
]


class NumericalError(RuntimeError):
    """A simulation produced a non-finite state."""


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled states of one simulation run.

    ``states`` holds absolute configurations for the nonlinear flow and
    deviations from the reference for the linearized model; ``edge_errors``
    holds the matching notion of edge error (exact squared-length errors,
    or the linearized ``R @ deviation``).
    """

    kind: str  # "nonlinear" | "lti"
    times: np.ndarray  # (T,)
    states: np.ndarray  # (T, n*d)
    edge_errors: np.ndarray  # (T, m)
    potential: np.ndarray  # (T,)
    framework_hash: str

    def tail_state(self, fraction: float = TAIL_FRACTION) -> np.ndarray:
        """Mean state over the trailing fraction of samples."""
        k = max(1, int(round(fraction * len(self.times))))
        return self.states[-k:].mean(axis=0)

    def tail_edge_errors(self, fraction: float = TAIL_FRACTION) -> np.ndarray:
        k = max(1, int(round(fraction * len(self.times))))
        return self.edge_errors[-k:].mean(axis=0)


@dataclass(frozen=True)
class EdgeErrorSeries:
    """Exact and (when available) linearized edge-error time series."""

    exact: np.ndarray
    linearized: np.ndarray | None


def _edge_index_arrays(fw: Framework):
    idx_i = np.array([i for i, _ in fw.edges], dtype=int)
    idx_j = np.array([j for _, j in fw.edges], dtype=int)
    return idx_i, idx_j


def _edge_errors_of_states(fw: Framework, states: np.ndarray, r_star: np.ndarray) -> np.ndarray:
    """Exact squared-length errors for a (T, n*d) stack of configurations."""
    if fw.m == 0:
        return np.zeros((states.shape[0], 0))
    idx_i, idx_j = _edge_index_arrays(fw)
    pts = states.reshape(states.shape[0], fw.n, fw.d)
    diff = pts[:, idx_i, :] - pts[:, idx_j, :]
    return np.einsum("tkd,tkd->tk", diff, diff) - r_star


def _stepper(rhs, dt: float, method: str):
    if method == "rk4":

        def step(y):
            k1 = rhs(y)
            k2 = rhs(y + 0.5 * dt * k1)
            k3 = rhs(y + 0.5 * dt * k2)
            k4 = rhs(y + dt * k3)
            return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    elif method == "euler":

        def step(y):
            return y + dt * rhs(y)

    else:
        raise ValidationError(f"sim.method: expected 'rk4' or 'euler', got {method!r}")
    return step


def _integrate(rhs, y0: np.ndarray, settings: SimSettings):
    steps = max(1, int(round(settings.t_end / settings.dt)))
    times = np.arange(steps + 1) * settings.dt
    states = np.empty((steps + 1, y0.size))
    step = _stepper(rhs, settings.dt, settings.method)
    y = np.array(y0, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(steps + 1):
            if not np.all(np.isfinite(y)):
                raise NumericalError(f"non-finite state at step {k} (t={k * settings.dt:.6g})")
            states[k] = y
            if k < steps:
                y = step(y)
    return times, states


def _gradient_rhs(fw: Framework, r_star: np.ndarray):
    """Right-hand side of the gradient flow, assembled edge by edge.

    Algebraically identical to ``-R(p)^T (r(p) - r_star)``; the test suite
    checks the two forms against each other.
    """
    idx_i, idx_j = _edge_index_arrays(fw)
    n, d = fw.n, fw.d

    def rhs(p):
        if fw.m == 0:
            return np.zeros_like(p)
        pts = p.reshape(n, d)
        diff = pts[idx_i] - pts[idx_j]
        err = np.einsum("kd,kd->k", diff, diff) - r_star
        pull = 2.0 * err[:, None] * diff
        out = np.zeros((n, d))
        np.add.at(out, idx_i, -pull)
        np.add.at(out, idx_j, pull)
        return out.ravel()

    return rhs


def simulate_nonlinear(fw: Framework, p0, settings: SimSettings = SimSettings()) -> Trajectory:
    """Integrate the nonlinear gradient flow from an absolute configuration."""
    start = np.asarray(p0, dtype=float).ravel()
    if start.size != fw.n * fw.d:
        raise ValidationError(f"state length: expected {fw.n * fw.d}, got {start.size}")
    r_star = rigidity_function(fw, fw.positions)
    times, states = _integrate(_gradient_rhs(fw, r_star), start, settings)
    errors = _edge_errors_of_states(fw, states, r_star)
    potential = 0.5 * np.einsum("tk,tk->t", errors, errors)
    return Trajectory(
        kind="nonlinear",
        times=times,
        states=states,
        edge_errors=errors,
        potential=potential,
        framework_hash=fw.content_hash(),
    )


def simulate_lti(sys: LinearizedSystem, dp0, settings: SimSettings = SimSettings()) -> Trajectory:
    """Integrate the linearized model from a deviation state.

    An impulse of direction ``w0`` and magnitude ``g`` corresponds to the
    initial deviation ``B @ w0 * g``. Edge errors along the trajectory are
    the linearized ones; :func:`edge_error_series` also provides the exact
    variant.
    """
    start = np.asarray(dp0, dtype=float).ravel()
    if start.size != sys.dim:
        raise ValidationError(f"state length: expected {sys.dim}, got {start.size}")
    a = sys.A
    times, states = _integrate(lambda y: a @ y, start, settings)
    r = rigidity_matrix(sys.framework).entries
    errors = states @ r.T
    potential = 0.5 * np.einsum("tk,tk->t", errors, errors)
    return Trajectory(
        kind="lti",
        times=times,
        states=states,
        edge_errors=errors,
        potential=potential,
        framework_hash=sys.framework.content_hash(),
    )


def edge_error_series(fw: Framework, traj: Trajectory) -> EdgeErrorSeries:
    """Exact (and for linearized runs also first-order) edge-error series."""
    if traj.framework_hash != fw.content_hash():
        raise ValidationError("trajectory was produced by a different framework")
    if traj.kind == "nonlinear":
        return EdgeErrorSeries(exact=traj.edge_errors, linearized=None)
    r_star = rigidity_function(fw, fw.positions)
    exact = _edge_errors_of_states(fw, traj.states + fw.positions, r_star)
    return EdgeErrorSeries(exact=exact, linearized=traj.edge_errors)


def steady_state(
    sys: LinearizedSystem, w0, magnitude: float = 1.0, rank_tol: float | None = None
) -> np.ndarray:
    """Limit deviation after an impulse: projection of the initial jump onto
    the flex space."""
    w = np.asarray(w0, dtype=float).ravel()
    if w.size != sys.framework.d:
        raise ValidationError(f"w0: expected {sys.framework.d} entries, got {w.size}")
    flex = flex_space(rigidity_matrix(sys.framework), rank_tol)
    return project(flex, sys.B @ w * magnitude)


def rbm_coefficients(rbm: RbmBasis, node: int, w0) -> tuple[float, float, float]:
    """Coefficients (c_x, c_y, c_r) excited by an input at one node.

    Uses the orthonormal rigid-body basis, so each coefficient is the inner
    product of the basis vector's block at the node with the input.
    Planar only.
    """
    d = rbm.translations.shape[1]
    if d != 2:
        raise ValidationError(f"rbm_coefficients is defined for d=2, got d={d}")
    w = np.asarray(w0, dtype=float).ravel()
    if w.size != 2:
        raise ValidationError(f"w0: expected 2 entries, got {w.size}")
    c_x = float(block(rbm.v_x, node, 2) @ w)
    c_y = float(block(rbm.v_y, node, 2) @ w)
    c_r = float(block(rbm.v_r, node, 2) @ w)
    return (c_x, c_y, c_r)


def rbm_motion_from_coords(rbm: RbmBasis, coords) -> np.ndarray:
    """Stacked motion for rigid-body coordinates (c_x, c_y, c_r).

    Coordinates are taken in the node-normalized convention: unit-block
    translations (every agent moves by (c_x, c_y)) plus the orthonormal
    rotation mode scaled by c_r.
    """
    d = rbm.translations.shape[1]
    if d != 2:
        raise ValidationError(f"rbm_motion_from_coords is defined for d=2, got d={d}")
    c = np.asarray(coords, dtype=float).ravel()
    if c.size != 3:
        raise ValidationError(f"coords: expected 3 entries, got {c.size}")
    nd = rbm.translations.shape[0]
    motion = np.zeros(nd)
    motion[0::2] = c[0]
    motion[1::2] = c[1]
    return motion + c[2] * rbm.v_r


@dataclass(frozen=True)
class ControllablePlane:
    """Geometry of the reachable rigid-body coordinates for one actuator.

    ``normal`` is the coordinate vector of the rigid-body motion that the
    actuator cannot excite: (-r_x, -r_y, 1) where (r_x, r_y) is the
    rotational mode's local velocity at the node. Every reachable
    coordinate vector (input direction paired with its rotational
    alignment) is orthogonal to it. ``recovery_line`` spans the plane's
    intersection with the pure-translation coordinates c_r = 0.
    """

    node: int
    rotation_at_node: np.ndarray  # (2,)
    normal: np.ndarray  # (3,)
    plane_basis: np.ndarray  # (3, 2), orthonormal
    recovery_line: np.ndarray  # (3,), unit

    def coords(self, w0) -> np.ndarray:
        """Rigid-body coordinates reached by an input direction."""
        w = np.asarray(w0, dtype=float).ravel()
        if w.size != 2:
            raise ValidationError(f"w0: expected 2 entries, got {w.size}")
        return np.array([w[0], w[1], float(self.rotation_at_node @ w)])

    def to_dict(self) -> dict:
        return {
            "node": self.node + 1,
            "rotation_at_node": list(self.rotation_at_node),
            "n_c": list(self.normal),
            "plane_basis": [list(col) for col in self.plane_basis.T],
            "recovery_line": list(self.recovery_line),
        }


def controllable_plane(rbm: RbmBasis, node: int) -> ControllablePlane:
    """Plane of rigid-body coordinates reachable from a single actuator."""
    d = rbm.translations.shape[1]
    if d != 2:
        raise ValidationError(f"controllable_plane is defined for d=2, got d={d}")
    r_i = np.array(block(rbm.v_r, node, 2))
    normal = np.array([-r_i[0], -r_i[1], 1.0])
    u, _, _ = np.linalg.svd(normal.reshape(-1, 1), full_matrices=True)
    plane_basis = u[:, 1:]
    nrm = float(np.hypot(r_i[0], r_i[1]))
    if nrm > 0.0:
        recovery_line = np.array([-r_i[1], r_i[0], 0.0]) / nrm
    else:
        recovery_line = np.array([1.0, 0.0, 0.0])
    return ControllablePlane(
        node=node,
        rotation_at_node=r_i,
        normal=normal,
        plane_basis=plane_basis,
        recovery_line=recovery_line,
    )


@dataclass(frozen=True)
class ImpulseOutcome:
    """Everything measured and predicted for one impulse experiment."""

    w0: np.ndarray
    magnitude: float
    w0_is_unit: bool
    alignment: float  # <rotation block at actuator, w0>
    coefficients: tuple[float, float, float]
    rotation_angle: float  # steady-state rotation angle: c_r over the rotation field norm
    steady_state: np.ndarray
    predicted_edge_sq_lengths: np.ndarray
    simulated_edge_sq_lengths: np.ndarray
    simulated_final_edge_errors: np.ndarray
    linearized_final_edge_errors: np.ndarray
    verdict: str  # "recovery" | "distortion" | "withheld"
    classification: str
    flex_excitation: float | None
    trajectory: Trajectory
    nonlinear_trajectory: Trajectory | None = None
    nonlinear_final_edge_errors: np.ndarray | None = None

    def to_dict(self) -> dict:
        out = {
            "w0": list(self.w0),
            "magnitude": self.magnitude,
            "w0_is_unit": self.w0_is_unit,
            "alignment": self.alignment,
            "coefficients": {
                "c_x": self.coefficients[0],
                "c_y": self.coefficients[1],
                "c_r": self.coefficients[2],
            },
            "rotation_angle": self.rotation_angle,
            "steady_state": list(self.steady_state),
            "predicted_edge_sq_lengths": list(self.predicted_edge_sq_lengths),
            "simulated_edge_sq_lengths": list(self.simulated_edge_sq_lengths),
            "simulated_final_edge_errors": list(self.simulated_final_edge_errors),
            "linearized_final_edge_errors": list(self.linearized_final_edge_errors),
            "verdict": self.verdict,
            "classification": self.classification,
            "flex_excitation": self.flex_excitation,
        }
        if self.nonlinear_final_edge_errors is not None:
            out["nonlinear_final_edge_errors"] = list(self.nonlinear_final_edge_errors)
        return out


def shape_recovery_experiment(
    scenario: Scenario,
    nonlinear: bool = False,
    tol: float | None = None,
    rank_tol: float | None = None,
) -> ImpulseOutcome:
    """Run one impulse experiment and decide recovery vs distortion.

    The verdict is "recovery" when the input direction is orthogonal to the
    rotational mode's local velocity at the actuated node (within the
    subspace tolerance), "distortion" otherwise, and "withheld" for
    flexible frameworks, where the impulse also excites non-rigid flexes
    and the rigid-body reasoning does not apply; the flex excitation
    magnitude is reported instead.
    """
    fw = scenario.framework
    if fw.d != 2:
        raise ValidationError(f"shape recovery experiment requires d=2, got d={fw.d}")
    sub_tol = tol if tol is not None else (scenario.tol.subspace or DEFAULT_TOL)
    r_tol = rank_tol if rank_tol is not None else scenario.tol.rank

    classification = classify_rigidity(fw, r_tol)
    if classification == FLEXIBLE:
        warnings.warn(
            "framework is flexible: the recovery/distortion verdict is withheld",
            stacklevel=2,
        )

    rbm = rbm_basis(fw)
    r_i = block(rbm.v_r, scenario.actuator, 2)
    alignment = float(r_i @ scenario.w0)

    sys = linearize(fw, scenario.actuator, scenario.sensor)
    dp0 = sys.B @ scenario.w0 * scenario.impulse
    traj = simulate_lti(sys, dp0, scenario.sim)
    tail = traj.tail_state()

    r_star = rigidity_function(fw, fw.positions)
    simulated_sq = _edge_errors_of_states(fw, (fw.positions + tail)[None, :], r_star)[0] + r_star
    simulated_err = simulated_sq - r_star
    linearized_err = rigidity_matrix(fw).entries @ tail

    # the jump is supported on the actuated block, so its coefficients are
    # inner products of the basis blocks there with w0 * impulse
    coeffs = rbm_coefficients(rbm, scenario.actuator, scenario.w0 * scenario.impulse)
    # the steady state rotates every agent by this angle about the center of
    # mass: the orthonormal-basis coefficient divided by the norm of the raw
    # rotation field stack(Omega (p_k - p_cm))
    centered = fw.points - rbm.center
    rotation_angle = coeffs[2] / float(np.sqrt(np.einsum("kd,kd->", centered, centered)))
    if fw.m:
        idx_i, idx_j = _edge_index_arrays(fw)
        rotated = (fw.points[idx_i] - fw.points[idx_j]) @ rotation_2d().T
        predicted = r_star + rotation_angle**2 * np.einsum("kd,kd->k", rotated, rotated)
    else:
        predicted = np.zeros(0)

    steady = steady_state(sys, scenario.w0, scenario.impulse, r_tol)

    flex_excitation = None
    if classification == FLEXIBLE:
        verdict = "withheld"
        rbm_part = rbm.matrix @ (rbm.matrix.T @ dp0)
        flex_excitation = float(np.linalg.norm(steady - rbm_part))
    elif abs(alignment) <= sub_tol:
        verdict = "recovery"
    else:
        verdict = "distortion"

    nl_traj = None
    nl_errors = None
    if nonlinear:
        nl_traj = simulate_nonlinear(fw, fw.positions + dp0, scenario.sim)
        nl_errors = nl_traj.tail_edge_errors()

    return ImpulseOutcome(
        w0=np.array(scenario.w0),
        magnitude=scenario.impulse,
        w0_is_unit=bool(abs(np.linalg.norm(scenario.w0) - 1.0) <= 1e-12),
        alignment=alignment,
        coefficients=coeffs,
        rotation_angle=rotation_angle,
        steady_state=steady,
        predicted_edge_sq_lengths=predicted,
        simulated_edge_sq_lengths=simulated_sq,
        simulated_final_edge_errors=simulated_err,
        linearized_final_edge_errors=linearized_err,
        verdict=verdict,
        classification=classification,
        flex_excitation=flex_excitation,
        trajectory=traj,
        nonlinear_trajectory=nl_traj,
        nonlinear_final_edge_errors=nl_errors,
    )


def sweep_impulse_angles(scenario: Scenario, n_angles: int) -> np.ndarray:
    """Impulse responses for input directions swept around the circle.

    Returns one row per angle: (angle, alignment, c_r, max final exact edge
    error). All angles are integrated together as one batched linear system,
    which keeps the output ordering deterministic.
    """
    fw = scenario.framework
    if fw.d != 2:
        raise ValidationError(f"angle sweep requires d=2, got d={fw.d}")
    if n_angles < 1:
        raise ValidationError(f"sweep size must be positive, got {n_angles}")

    angles = 2.0 * np.pi * np.arange(n_angles) / n_angles
    directions = np.vstack([np.cos(angles), np.sin(angles)])  # (2, N)

    rbm = rbm_basis(fw)
    r_i = block(rbm.v_r, scenario.actuator, 2)
    alignments = r_i @ directions
    c_r = alignments * scenario.impulse

    sys = linearize(fw, scenario.actuator, scenario.sensor)
    y = sys.B @ directions * scenario.impulse  # (nd, N)
    settings = scenario.sim
    steps = max(1, int(round(settings.t_end / settings.dt)))
    step = _stepper(lambda z: sys.A @ z, settings.dt, settings.method)
    tail_start = steps + 1 - max(1, int(round(TAIL_FRACTION * (steps + 1))))
    acc = np.zeros_like(y)
    count = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(steps + 1):
            if (k % 64 == 0 or k == steps) and not np.all(np.isfinite(y)):
                raise NumericalError(f"non-finite state at step {k} (t={k * settings.dt:.6g})")
            if k >= tail_start:
                acc += y
                count += 1
            if k < steps:
                y = step(y)
    tails = acc / count  # (nd, N)

    r_star = rigidity_function(fw, fw.positions)
    finals = _edge_errors_of_states(fw, tails.T + fw.positions, r_star)
    max_err = np.abs(finals).max(axis=1) if fw.m else np.zeros(n_angles)
    return np.column_stack([angles, alignments, c_r, max_err])
