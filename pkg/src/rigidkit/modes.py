"""Linearized input-output model and the geometry of its hidden modes.

The linearized gradient dynamics around the reference configuration have
system matrix ``A = -R^T R`` (a configuration-weighted graph Laplacian),
single-node input selector ``B = e_i (x) I_d`` and output selector
``C = e_j^T (x) I_d``. An eigenvector is uncontrollable exactly when its
block at the actuated node vanishes, and unobservable exactly when its
block at the measured node vanishes, so every construction here reduces to
"pinning" eigenspaces at a node.

Subspace relations that are expected to be exact are asserted by the test
suite; relations whose status depends on the framework (equality of the
uncontrollable subspace with the local rotation subspace, the complete
graph specialization) are only *reported*, with dimensions and principal
angles, never assumed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .framework import Framework, ValidationError
from .rigidity import (
    FLEXIBLE,
    classify_rigidity,
    deformation_space,
    flex_space,
    rigid_motion_dim,
    rigidity_matrix,
    skew_generators,
)
from .subspaces import (
    DEFAULT_TOL,
    Subspace,
    contains,
    direct_sum_check,
    intersect,
    orthonormalize,
    principal_angles,
)

EIG_GROUP_RTOL = 1e-7

__all__ = [
    "EIG_GROUP_RTOL",
    "LinearizedSystem",
    "EigenspaceModes",
    "ModeReport",
    "linearize",
    "eigenspaces",
    "uncontrollable_subspace",
    "unobservable_subspace",
    "global_rotation_subspace",
    "local_rotation_subspace",
    "elementary_rotations",
    "local_rotation_constraints",
    "rbm_deformation_split_report",
    "local_rotation_report",
    "specialization_report",
    "classify_modes",
    "hidden_mode_checks",
]


@dataclass(frozen=True)
class LinearizedSystem:
    """LTI model of the gradient dynamics around the reference configuration."""

    framework: Framework
    actuator: int
    sensor: int
    A: np.ndarray  # (nd, nd), symmetric negative semidefinite
    B: np.ndarray  # (nd, d)
    C: np.ndarray  # (d, nd)

    @property
    def dim(self) -> int:
        return self.A.shape[0]


def linearize(fw: Framework, actuator: int, sensor: int) -> LinearizedSystem:
    """Stiffness matrix ``-R^T R`` with input/output selectors at two nodes."""
    for node, name in ((actuator, "actuator"), (sensor, "sensor")):
        if not (0 <= node < fw.n):
            raise ValidationError(f"{name}: node index {node} out of range for n={fw.n}")
    r = rigidity_matrix(fw).entries
    gram = r.T @ r
    a = -0.5 * (gram + gram.T)  # symmetrize so A == A.T holds exactly
    d = fw.d
    b = np.zeros((fw.n * d, d))
    b[actuator * d : (actuator + 1) * d, :] = np.eye(d)
    c = np.zeros((d, fw.n * d))
    c[:, sensor * d : (sensor + 1) * d] = np.eye(d)
    return LinearizedSystem(framework=fw, actuator=actuator, sensor=sensor, A=a, B=b, C=c)


def eigenspaces(A: np.ndarray, group_rtol: float = EIG_GROUP_RTOL) -> list[tuple[float, np.ndarray]]:
    """Eigenvalue groups of a symmetric matrix, ascending.

    Consecutive eigenvalues closer than ``group_rtol * max|lambda|`` share
    one eigenspace; repeated eigenvalues are common here (symmetric
    configurations) and the pinning analysis must act on whole eigenspaces.
    """
    lam, vec = np.linalg.eigh(A)
    if lam.size == 0:
        return []
    gap = group_rtol * float(np.abs(lam).max())
    groups = []
    start = 0
    for k in range(1, lam.size + 1):
        if k == lam.size or lam[k] - lam[k - 1] > gap:
            groups.append((float(lam[start:k].mean()), vec[:, start:k]))
            start = k
    return groups


def _block_rows(node: int, d: int) -> slice:
    return slice(node * d, (node + 1) * d)


def _pinned_coeffs(basis: np.ndarray, rows: np.ndarray, tol: float) -> np.ndarray:
    """Coefficient vectors c with ``basis @ c`` vanishing on the given rows."""
    r = basis.shape[1]
    if r == 0:
        return np.zeros((0, 0))
    m = basis[rows, :]
    _, s, vt = np.linalg.svd(m, full_matrices=True)
    mask = np.array([k >= s.size or s[k] <= tol for k in range(r)])
    return vt[mask].T


def _complement_coeffs(sub: np.ndarray, r: int) -> np.ndarray:
    """Orthonormal complement of a coefficient subspace inside R^r."""
    if sub.shape[1] == 0:
        return np.eye(r)
    u, s, _ = np.linalg.svd(sub, full_matrices=True)
    rank = int(np.sum(s > 1e-12))
    return u[:, rank:]


def _pinned_modes(sys: LinearizedSystem, node: int, tol: float, group_rtol: float) -> Subspace:
    d = sys.framework.d
    rows = np.arange(node * d, (node + 1) * d)
    pieces = []
    for _, basis in eigenspaces(sys.A, group_rtol):
        coeffs = _pinned_coeffs(basis, rows, tol)
        if coeffs.shape[1]:
            pieces.append(basis @ coeffs)
    if not pieces:
        return Subspace.zero(sys.dim, tol)
    return orthonormalize(np.hstack(pieces), tol=tol)


def uncontrollable_subspace(
    sys: LinearizedSystem, tol: float = DEFAULT_TOL, group_rtol: float = EIG_GROUP_RTOL
) -> Subspace:
    """Modes that no input at the actuated node can reach.

    Per eigenvalue group, keeps the part of the eigenspace whose block at
    the actuator vanishes, then sums the (mutually orthogonal) pieces.
    """
    return _pinned_modes(sys, sys.actuator, tol, group_rtol)


def unobservable_subspace(
    sys: LinearizedSystem, tol: float = DEFAULT_TOL, group_rtol: float = EIG_GROUP_RTOL
) -> Subspace:
    """Modes invisible at the measured node; dual of the uncontrollable case."""
    return _pinned_modes(sys, sys.sensor, tol, group_rtol)


def global_rotation_subspace(fw: Framework, node: int, tol: float = DEFAULT_TOL) -> Subspace:
    """Pure rotations of the whole framework about one node.

    Spanned by the stacked vectors with blocks ``S (p_k - p_node)`` for each
    elementary skew generator S; every member has a zero block at ``node``.
    """
    if not (0 <= node < fw.n):
        raise IndexError(f"node index {node} out of range for n={fw.n}")
    offsets = fw.points - fw.points[node]
    cols = [(offsets @ gen.T).ravel() for gen in skew_generators(fw.d)]
    stacked = np.column_stack(cols)
    if np.linalg.norm(stacked, axis=0).max() == 0.0:
        raise ValidationError(f"all agents coincide with node {node}: rotation subspace is zero")
    return orthonormalize(stacked, tol=tol)


def _orthogonal_complement_of_vector(x: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the directions orthogonal to a nonzero vector."""
    u, _, _ = np.linalg.svd(x.reshape(-1, 1), full_matrices=True)
    return u[:, 1:]


def local_rotation_subspace(fw: Framework, node: int, tol: float = DEFAULT_TOL) -> Subspace:
    """Motions that fix ``node`` and preserve its incident edge lengths to
    first order.

    Built block by block: each neighbor contributes the d-1 directions
    orthogonal to its edge vector, every non-neighbor moves freely, and the
    fixed node contributes nothing. The blocks are disjoint, so the basis
    is orthonormal by construction; dimension d(n-1) - deg(node)
    for generic positions.
    """
    if not (0 <= node < fw.n):
        raise IndexError(f"node index {node} out of range for n={fw.n}")
    n, d = fw.n, fw.d
    pts = fw.points
    nbrs = set(fw.neighbors(node))
    cols = []
    for k in range(n):
        if k == node:
            continue
        rows = _block_rows(k, d)
        if k in nbrs:
            local = _orthogonal_complement_of_vector(pts[k] - pts[node])
        else:
            local = np.eye(d)
        for col in local.T:
            v = np.zeros(n * d)
            v[rows] = col
            cols.append(v)
    if not cols:
        return Subspace.zero(n * d, tol)
    return Subspace(basis=np.column_stack(cols), tol=tol)


def elementary_rotations(fw: Framework, node: int, neighbor: int) -> np.ndarray:
    """Single-neighbor rotations about a fixed node, one column per skew
    generator: block at ``neighbor`` is ``S (p_neighbor - p_node)``, all
    other blocks zero. For d=2 this is one column."""
    pts = fw.points
    x = pts[neighbor] - pts[node]
    cols = []
    for gen in skew_generators(fw.d):
        v = np.zeros(fw.n * fw.d)
        v[_block_rows(neighbor, fw.d)] = gen @ x
        cols.append(v)
    return np.column_stack(cols)


def local_rotation_constraints(fw: Framework, node: int) -> np.ndarray:
    """Stacked constraint matrix whose nullspace is the local rotation
    subspace: d rows pinning the node plus one row per incident edge."""
    n, d = fw.n, fw.d
    pts = fw.points
    rows = [np.zeros(n * d) for _ in range(d)]
    for a in range(d):
        rows[a][node * d + a] = 1.0
    for k in fw.neighbors(node):
        row = np.zeros(n * d)
        row[_block_rows(k, d)] = pts[k] - pts[node]
        rows.append(row)
    return np.vstack(rows)


def _angles_list(s1: Subspace, s2: Subspace) -> list[float]:
    if s1.dim == 0 or s2.dim == 0:
        return []
    return [float(a) for a in principal_angles(s1, s2)]


def _pinned_ambient_subspace(n: int, d: int, node: int, tol: float) -> Subspace:
    """All stacked vectors whose block at ``node`` vanishes."""
    keep = [c for c in range(n * d) if not node * d <= c < (node + 1) * d]
    return Subspace(basis=np.eye(n * d)[:, keep], tol=tol)


def rbm_deformation_split_report(
    sys: LinearizedSystem,
    rank_tol: float | None = None,
    tol: float = DEFAULT_TOL,
    group_rtol: float = EIG_GROUP_RTOL,
) -> dict:
    """Split the uncontrollable subspace into its rigid-body and deforming
    parts, eigenspace by eigenspace.

    The rigid-body part is the pinned portion of the zero eigenspace; the
    deforming part sums the pinned portions of all decaying eigenspaces.
    The two are orthogonal and together give the whole uncontrollable
    subspace, which the report verifies. The plain set intersection of the
    deformation space with the pinned ambient subspace is also reported:
    it can be strictly larger because it may mix eigenspaces.
    """
    fw = sys.framework
    d = fw.d
    rows = np.arange(sys.actuator * d, (sys.actuator + 1) * d)
    groups = eigenspaces(sys.A, group_rtol)
    pieces = []
    for _, basis in groups:
        coeffs = _pinned_coeffs(basis, rows, tol)
        pieces.append(basis @ coeffs)
    # the zero eigenspace of the negative semidefinite A is the last group
    rbm_cols = pieces[-1]
    def_cols = [p for p in pieces[:-1] if p.shape[1]]
    rbm_part = orthonormalize(rbm_cols, tol=tol, ambient_dim=sys.dim)
    def_part = (
        orthonormalize(np.hstack(def_cols), tol=tol)
        if def_cols
        else Subspace.zero(sys.dim, tol)
    )
    total = uncontrollable_subspace(sys, tol, group_rtol)

    rm = rigidity_matrix(fw)
    pinned_ambient = _pinned_ambient_subspace(fw.n, d, sys.actuator, tol)
    raw = intersect(deformation_space(rm, rank_tol, tol), pinned_ambient)

    return {
        "uncontrollable_dim": total.dim,
        "rbm_component_dim": rbm_part.dim,
        "deformation_component_dim": def_part.dim,
        "direct_sum_holds": direct_sum_check(rbm_part, def_part, total),
        "component_principal_angles": _angles_list(rbm_part, def_part),
        "ambient_deformation_intersection_dim": raw.dim,
    }


def local_rotation_report(
    sys: LinearizedSystem,
    tol: float = DEFAULT_TOL,
    group_rtol: float = EIG_GROUP_RTOL,
) -> dict:
    """Compare the uncontrollable subspace with the local rotation subspace.

    Both containment directions are reported with principal angles; no
    equality is asserted, because for generic sparse frameworks the two
    need not coincide.
    """
    u = uncontrollable_subspace(sys, tol, group_rtol)
    t = local_rotation_subspace(sys.framework, sys.actuator, tol)
    local_contains = contains(t, u)
    reverse = contains(u, t)
    return {
        "uncontrollable_dim": u.dim,
        "local_rotation_dim": t.dim,
        "local_contains_uncontrollable": local_contains,
        "uncontrollable_contains_local": reverse,
        "equal": local_contains and reverse,
        "principal_angles": _angles_list(u, t),
    }


def specialization_report(
    fw: Framework,
    node: int,
    rank_tol: float | None = None,
    tol: float = DEFAULT_TOL,
    group_rtol: float = EIG_GROUP_RTOL,
) -> dict:
    """Specialized decompositions for rigid frameworks and complete graphs.

    For a rigid framework: checks whether the uncontrollable subspace
    splits as the rotation about the node plus the deforming part of the
    local rotation subspace. For a complete graph with n >= d+1: compares
    the local and global rotation subspaces. Verdicts are recorded, not
    asserted.
    """
    classification = classify_rigidity(fw, rank_tol)
    r_g = global_rotation_subspace(fw, node, tol)
    t = local_rotation_subspace(fw, node, tol)

    rigid: dict = {"applicable": classification != FLEXIBLE, "classification": classification}
    if rigid["applicable"]:
        sys = linearize(fw, node, node)
        u = uncontrollable_subspace(sys, tol, group_rtol)
        rm = rigidity_matrix(fw)
        t_def = intersect(t, deformation_space(rm, rank_tol, tol))
        overlap = 0.0
        if r_g.dim and t_def.dim:
            overlap = float(np.linalg.svd(r_g.basis.T @ t_def.basis, compute_uv=False).max())
        rigid.update(
            {
                "global_rotation_dim": r_g.dim,
                "local_deformation_dim": t_def.dim,
                "uncontrollable_dim": u.dim,
                "components_orthogonal": overlap <= tol,
                "decomposition_holds": direct_sum_check(r_g, t_def, u),
            }
        )

    complete: dict = {"applicable": fw.is_complete() and fw.n >= fw.d + 1}
    if complete["applicable"]:
        local_contains = contains(t, r_g)
        reverse = contains(r_g, t)
        complete.update(
            {
                "local_rotation_dim": t.dim,
                "global_rotation_dim": r_g.dim,
                "equal": local_contains and reverse,
                "principal_angles": _angles_list(t, r_g),
            }
        )
    else:
        complete["reason"] = (
            "graph is not complete" if not fw.is_complete() else f"needs n >= d+1, got n={fw.n}"
        )

    return {"rigid": rigid, "complete_graph": complete}


@dataclass(frozen=True)
class EigenspaceModes:
    """Four-way controllability/observability split of one eigenspace.

    The doubly hidden part collects eigenvectors pinned at both nodes; the
    "uncontrollable but observable" part is its orthogonal complement
    inside the pinned-at-actuator part (dually for the sensor), and the
    rest of the eigenspace is controllable and observable. The four
    dimensions always add up to the eigenspace dimension.
    """

    eigenvalue: float
    multiplicity: int
    controllable_observable: Subspace
    uncontrollable_observable: Subspace
    controllable_unobservable: Subspace
    uncontrollable_unobservable: Subspace

    def dims(self) -> dict:
        return {
            "controllable_observable": self.controllable_observable.dim,
            "uncontrollable_observable": self.uncontrollable_observable.dim,
            "controllable_unobservable": self.controllable_unobservable.dim,
            "uncontrollable_unobservable": self.uncontrollable_unobservable.dim,
        }


@dataclass(frozen=True)
class ModeReport:
    """Eigenvalues of the linearized system with their hidden-mode split."""

    actuator: int
    sensor: int
    groups: tuple[EigenspaceModes, ...]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([g.eigenvalue for g in self.groups])

    @property
    def four_way(self) -> dict:
        totals = {
            "controllable_observable": 0,
            "uncontrollable_observable": 0,
            "controllable_unobservable": 0,
            "uncontrollable_unobservable": 0,
        }
        for g in self.groups:
            for key, val in g.dims().items():
                totals[key] += val
        return totals

    @property
    def state_dim(self) -> int:
        return sum(g.multiplicity for g in self.groups)

    def to_dict(self) -> dict:
        return {
            "actuator": self.actuator + 1,
            "sensor": self.sensor + 1,
            "eigenvalues": [
                {"value": g.eigenvalue, "multiplicity": g.multiplicity, "dims": g.dims()}
                for g in self.groups
            ],
            "four_way": self.four_way,
            "state_dim": self.state_dim,
        }


def classify_modes(
    sys: LinearizedSystem, tol: float = DEFAULT_TOL, group_rtol: float = EIG_GROUP_RTOL
) -> ModeReport:
    """Split every eigenspace into the four controllability/observability
    categories by pinning at the actuator and sensor nodes."""
    d = sys.framework.d
    rows_i = np.arange(sys.actuator * d, (sys.actuator + 1) * d)
    rows_j = np.arange(sys.sensor * d, (sys.sensor + 1) * d)
    groups = []
    for lam, basis in eigenspaces(sys.A, group_rtol):
        r = basis.shape[1]
        nc = _pinned_coeffs(basis, rows_i, tol)
        no = _pinned_coeffs(basis, rows_j, tol)
        nh = _pinned_coeffs(basis, np.concatenate([rows_i, rows_j]), tol)

        def _sub(coeffs: np.ndarray) -> Subspace:
            if coeffs.shape[1] == 0:
                return Subspace.zero(sys.dim, tol)
            return Subspace(basis=basis @ coeffs, tol=tol)

        # complement of the doubly hidden part inside each pinned part
        beta_c = nc.T @ nh
        co_coeffs = nc @ _complement_coeffs(beta_c, nc.shape[1]) if nc.shape[1] else nc
        beta_o = no.T @ nh
        ob_coeffs = no @ _complement_coeffs(beta_o, no.shape[1]) if no.shape[1] else no
        both = np.hstack([nc, no]) if (nc.shape[1] or no.shape[1]) else np.zeros((r, 0))
        visible = _complement_coeffs(orthonormalize(both, ambient_dim=r).basis, r)

        groups.append(
            EigenspaceModes(
                eigenvalue=lam,
                multiplicity=r,
                controllable_observable=_sub(visible),
                uncontrollable_observable=_sub(co_coeffs),
                controllable_unobservable=_sub(ob_coeffs),
                uncontrollable_unobservable=_sub(nh),
            )
        )
    return ModeReport(actuator=sys.actuator, sensor=sys.sensor, groups=tuple(groups))


def hidden_mode_checks(
    sys: LinearizedSystem,
    rank_tol: float | None = None,
    tol: float = DEFAULT_TOL,
    group_rtol: float = EIG_GROUP_RTOL,
) -> dict:
    """Run every subspace-relation check for one system and collect the
    verdicts into a JSON-ready report."""
    fw = sys.framework
    rm = rigidity_matrix(fw)
    flex = flex_space(rm, rank_tol, tol)
    u = uncontrollable_subspace(sys, tol, group_rtol)
    r_g = global_rotation_subspace(fw, sys.actuator, tol)
    t = local_rotation_subspace(fw, sys.actuator, tol)
    u_rbm = intersect(u, flex)
    classification = classify_rigidity(fw, rank_tol)
    rigid = classification != FLEXIBLE

    bound = rigid_motion_dim(fw.d) - fw.d  # d(d+1)/2 - d = d(d-1)/2
    char_angles = _angles_list(u_rbm, r_g)
    char_matches = (
        u_rbm.dim == r_g.dim and (not char_angles or max(char_angles) < tol)
    )
    return {
        "classification": classification,
        "existence_bound": {
            "applicable": rigid,
            "uncontrollable_rbm_dim": u_rbm.dim,
            "lower_bound": bound,
            "holds": (not rigid) or u_rbm.dim >= bound,
        },
        "rotation_characterization": {
            "applicable": rigid,
            "uncontrollable_rbm_dim": u_rbm.dim,
            "global_rotation_dim": r_g.dim,
            "max_principal_angle": max(char_angles) if char_angles else 0.0,
            "matches": (not rigid) or char_matches,
        },
        "rotation_inclusion": {
            "global_rotation_dim": r_g.dim,
            "local_rotation_dim": t.dim,
            "holds": contains(t, r_g),
        },
        "uncontrollable_split": rbm_deformation_split_report(sys, rank_tol, tol, group_rtol),
        "uncontrollable_vs_local_rotation": local_rotation_report(sys, tol, group_rtol),
        "specializations": specialization_report(fw, sys.actuator, rank_tol, tol, group_rtol),
    }
