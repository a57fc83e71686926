"""SE(2) pose graph: robot poses, tagged-object poses, and least squares.

Robot pose nodes are chained by odometry constraints; every accepted tag
adds a relative-pose constraint from the observing robot pose to the
object's node, so repeated tags of the same label fuse into one
estimate. The first robot pose is held fixed as the gauge anchor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DisconnectedGraph, SchemaViolation, SingularSystem
from .geometry import Pose2D, normalize_angle

ODOM_INFORMATION = np.diag([100.0, 100.0, 400.0])
OBJECT_INFORMATION = np.diag([50.0, 50.0, 100.0])

MAX_ITERATIONS = 100
ABS_TOL = 1e-9
REL_TOL = 1e-6


def _check_information(omega: np.ndarray) -> np.ndarray:
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (3, 3):
        raise SchemaViolation("information matrix must be 3x3")
    if not np.allclose(omega, omega.T, atol=1e-12):
        raise SchemaViolation("information matrix must be symmetric")
    if np.any(np.linalg.eigvalsh(omega) <= 0):
        raise SchemaViolation("information matrix must be positive definite")
    return omega


@dataclass
class Edge:
    """Relative-pose constraint between two state blocks."""

    a: int
    b: int
    z: np.ndarray      # (3,) measured pose of b in a's frame
    omega: np.ndarray  # (3, 3) information


@dataclass
class PoseGraph:
    """State blocks are robot poses (by step index) then object poses
    (by label, insertion order)."""

    poses: list[np.ndarray] = field(default_factory=list)
    object_labels: list[str] = field(default_factory=list)
    object_estimates: dict[str, np.ndarray] = field(default_factory=dict)
    odom_edges: list[Edge] = field(default_factory=list)
    object_edges: list[tuple[int, str, np.ndarray, np.ndarray]] = field(default_factory=list)

    # -- construction --

    def add_pose(self, estimate: Pose2D) -> int:
        self.poses.append(estimate.as_vector())
        return len(self.poses) - 1

    def add_odom_edge(self, i: int, j: int, z: Pose2D, omega=ODOM_INFORMATION) -> None:
        self.odom_edges.append(Edge(i, j, z.as_vector(), _check_information(omega)))

    def add_object(self, label: str, estimate: Pose2D) -> None:
        if label not in self.object_estimates:
            self.object_labels.append(label)
            self.object_estimates[label] = estimate.as_vector()

    def add_object_edge(self, pose_index: int, label: str, z: Pose2D,
                        omega=OBJECT_INFORMATION) -> None:
        if label not in self.object_estimates:
            raise SchemaViolation(f"object node {label!r} not added")
        self.object_edges.append((pose_index, label, z.as_vector(), _check_information(omega)))

    def copy(self) -> "PoseGraph":
        return PoseGraph(
            poses=[p.copy() for p in self.poses],
            object_labels=list(self.object_labels),
            object_estimates={k: v.copy() for k, v in self.object_estimates.items()},
            odom_edges=[Edge(e.a, e.b, e.z.copy(), e.omega.copy()) for e in self.odom_edges],
            object_edges=[(i, l, z.copy(), om.copy()) for i, l, z, om in self.object_edges],
        )

    # -- state-vector view --

    @property
    def num_blocks(self) -> int:
        return len(self.poses) + len(self.object_labels)

    def _object_block(self, label: str) -> int:
        return len(self.poses) + self.object_labels.index(label)

    def _all_edges(self) -> list[Edge]:
        out = list(self.odom_edges)
        for i, label, z, omega in self.object_edges:
            out.append(Edge(i, self._object_block(label), z, omega))
        return out

    def state_vector(self) -> np.ndarray:
        blocks = list(self.poses) + [self.object_estimates[l] for l in self.object_labels]
        return np.concatenate(blocks) if blocks else np.zeros(0)

    def set_state_vector(self, x: np.ndarray) -> None:
        for k in range(len(self.poses)):
            self.poses[k] = x[3 * k:3 * k + 3].copy()
            self.poses[k][2] = normalize_angle(self.poses[k][2])
        for n, label in enumerate(self.object_labels):
            k = len(self.poses) + n
            v = x[3 * k:3 * k + 3].copy()
            v[2] = normalize_angle(v[2])
            self.object_estimates[label] = v

    def pose_of(self, index: int) -> Pose2D:
        return Pose2D.from_vector(self.poses[index])

    def object_pose(self, label: str) -> Pose2D:
        return Pose2D.from_vector(self.object_estimates[label])

    def is_connected(self) -> bool:
        n = self.num_blocks
        if n == 0:
            return False
        parent = list(range(n))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for e in self._all_edges():
            ra, rb = find(e.a), find(e.b)
            if ra != rb:
                parent[ra] = rb
        return len({find(i) for i in range(n)}) == 1


# -- residuals and Jacobians --

def edge_residual(xa: np.ndarray, xb: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Measurement error of xb seen from xa: t2v(Z^-1 * Xa^-1 * Xb)."""
    ca, sa = math.cos(xa[2]), math.sin(xa[2])
    cz, sz = math.cos(z[2]), math.sin(z[2])
    dx, dy = xb[0] - xa[0], xb[1] - xa[1]
    # R(theta_a)^T (t_b - t_a)
    lx = ca * dx + sa * dy
    ly = -sa * dx + ca * dy
    ex = cz * (lx - z[0]) + sz * (ly - z[1])
    ey = -sz * (lx - z[0]) + cz * (ly - z[1])
    eth = normalize_angle(xb[2] - xa[2] - z[2])
    return np.array([ex, ey, eth])


def edge_jacobians(xa: np.ndarray, xb: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(A, B) = d(residual)/d(xa), d(residual)/d(xb)."""
    ca, sa = math.cos(xa[2]), math.sin(xa[2])
    rz = np.array([[math.cos(z[2]), -math.sin(z[2])], [math.sin(z[2]), math.cos(z[2])]])
    ra = np.array([[ca, -sa], [sa, ca]])
    dra_T = np.array([[-sa, ca], [-ca, -sa]])  # d(R_a^T)/d(theta_a)
    dt = xb[:2] - xa[:2]

    a = np.zeros((3, 3))
    a[:2, :2] = -rz.T @ ra.T
    a[:2, 2] = rz.T @ (dra_T @ dt)
    a[2, 2] = -1.0

    b = np.zeros((3, 3))
    b[:2, :2] = rz.T @ ra.T
    b[2, 2] = 1.0
    return a, b


def chi2(graph: PoseGraph) -> float:
    total = 0.0
    blocks = list(graph.poses) + [graph.object_estimates[l] for l in graph.object_labels]
    for e in graph._all_edges():
        r = edge_residual(blocks[e.a], blocks[e.b], e.z)
        total += float(r @ e.omega @ r)
    return total


def build_normal_equations(graph: PoseGraph) -> tuple[np.ndarray, np.ndarray]:
    """Assemble H = J^T O J and b = J^T O e over all edges, full state."""
    n = 3 * graph.num_blocks
    h = np.zeros((n, n))
    g = np.zeros(n)
    blocks = list(graph.poses) + [graph.object_estimates[l] for l in graph.object_labels]
    for e in graph._all_edges():
        xa, xb = blocks[e.a], blocks[e.b]
        r = edge_residual(xa, xb, e.z)
        ja, jb = edge_jacobians(xa, xb, e.z)
        sa, sb = 3 * e.a, 3 * e.b
        h[sa:sa + 3, sa:sa + 3] += ja.T @ e.omega @ ja
        h[sa:sa + 3, sb:sb + 3] += ja.T @ e.omega @ jb
        h[sb:sb + 3, sa:sa + 3] += jb.T @ e.omega @ ja
        h[sb:sb + 3, sb:sb + 3] += jb.T @ e.omega @ jb
        g[sa:sa + 3] += ja.T @ e.omega @ r
        g[sb:sb + 3] += jb.T @ e.omega @ r
    return h, g


def solve_anchored(h: np.ndarray, g: np.ndarray, damping: float = 0.0) -> np.ndarray:
    """Solve (H + damping*I) dx = -g with state block 0 held fixed.

    Returns the full-length update with zeros in the anchored block.
    Raises numpy.linalg.LinAlgError when the reduced system is singular.
    """
    n = len(g)
    free = np.arange(3, n)
    hf = h[np.ix_(free, free)]
    if damping > 0.0:
        hf = hf + damping * np.eye(len(free))
    dxf = np.linalg.solve(hf, -g[free])
    dx = np.zeros(n)
    dx[free] = dxf
    return dx


def gauss_newton_step(graph: PoseGraph) -> PoseGraph:
    """One undamped Gauss-Newton update with the first pose anchored."""
    if not graph.is_connected():
        raise DisconnectedGraph("pose graph must be connected before optimization")
    h, g = build_normal_equations(graph)
    try:
        dx = solve_anchored(h, g)
    except np.linalg.LinAlgError as e:
        raise SingularSystem(str(e)) from e
    out = graph.copy()
    out.set_state_vector(graph.state_vector() + dx)
    return out


@dataclass
class OptimizeConfig:
    max_iterations: int = MAX_ITERATIONS
    abs_tol: float = ABS_TOL
    rel_tol: float = REL_TOL
    initial_lambda: float = 1e-6
    lambda_factor: float = 10.0
    max_lambda: float = 1e12


@dataclass
class OptimizeResult:
    graph: PoseGraph
    chi2_trace: list[float]

    @property
    def initial_chi2(self) -> float:
        return self.chi2_trace[0]

    @property
    def final_chi2(self) -> float:
        return self.chi2_trace[-1]

    @property
    def iterations(self) -> int:
        return len(self.chi2_trace) - 1


def optimize(graph: PoseGraph, config: OptimizeConfig | None = None) -> OptimizeResult:
    """Levenberg-Marquardt-damped Gauss-Newton to a local minimum.

    The chi2 trace holds the objective after every accepted step and is
    non-increasing. Stops when the decrease falls under the absolute or
    relative tolerance, or after `max_iterations`.
    """
    cfg = config or OptimizeConfig()
    if not graph.is_connected():
        raise DisconnectedGraph("pose graph must be connected before optimization")

    current = graph.copy()
    current_chi2 = chi2(current)
    trace = [current_chi2]
    lam = cfg.initial_lambda

    for _ in range(cfg.max_iterations):
        if current_chi2 <= cfg.abs_tol:
            break
        h, g = build_normal_equations(current)
        # try the plain Gauss-Newton step first, then escalate damping
        trial = 0.0
        accepted = False
        while trial <= cfg.max_lambda:
            try:
                dx = solve_anchored(h, g, damping=trial)
            except np.linalg.LinAlgError:
                trial = max(trial * cfg.lambda_factor, lam)
                continue
            candidate = current.copy()
            candidate.set_state_vector(current.state_vector() + dx)
            candidate_chi2 = chi2(candidate)
            if candidate_chi2 <= current_chi2:
                previous = current_chi2
                current, current_chi2 = candidate, candidate_chi2
                trace.append(current_chi2)
                lam = max((trial or lam) / cfg.lambda_factor, 1e-12)
                accepted = True
                break
            trial = max(trial * cfg.lambda_factor, lam)
            lam = trial
        if not accepted:
            if trial > cfg.max_lambda and not trace[1:]:
                raise SingularSystem("damping failed to produce a solvable step")
            break
        improvement = previous - current_chi2
        if improvement < cfg.abs_tol or (previous > 0 and improvement / previous < cfg.rel_tol):
            break
    return OptimizeResult(graph=current, chi2_trace=trace)


# -- g2o text interchange --

def to_g2o(graph: PoseGraph) -> str:
    """Serialize as g2o text (VERTEX_SE2 / EDGE_SE2 / FIX), with object
    vertices annotated by comment lines so labels survive a round trip."""
    def vec3(v) -> str:
        return " ".join(repr(float(x)) for x in v)

    lines = []
    for i, p in enumerate(graph.poses):
        lines.append(f"VERTEX_SE2 {i} {vec3(p)}")
    for n, label in enumerate(graph.object_labels):
        v = graph.object_estimates[label]
        vid = len(graph.poses) + n
        lines.append(f"# OBJECT {vid} {label}")
        lines.append(f"VERTEX_SE2 {vid} {vec3(v)}")
    if graph.poses:
        lines.append("FIX 0")

    def info6(omega: np.ndarray) -> str:
        vals = [omega[0, 0], omega[0, 1], omega[0, 2], omega[1, 1], omega[1, 2], omega[2, 2]]
        return " ".join(repr(float(v)) for v in vals)

    for e in graph.odom_edges:
        lines.append(f"EDGE_SE2 {e.a} {e.b} {vec3(e.z)} {info6(e.omega)}")
    for i, label, z, omega in graph.object_edges:
        vid = graph._object_block(label)
        lines.append(f"EDGE_SE2 {i} {vid} {vec3(z)} {info6(omega)}")
    return "\n".join(lines) + "\n"


def from_g2o(text: str) -> PoseGraph:
    """Parse g2o text back into a PoseGraph.

    Vertices named by `# OBJECT <id> <label>` comments become object
    nodes; all other vertices are robot poses. Without annotations every
    edge is treated as an odometry constraint.
    """
    object_ids: dict[int, str] = {}
    vertices: dict[int, np.ndarray] = {}
    edges: list[tuple[int, int, np.ndarray, np.ndarray]] = []
    for raw in text.splitlines():
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "#":
            if len(parts) >= 4 and parts[1] == "OBJECT":
                object_ids[int(parts[2])] = parts[3]
            continue
        if parts[0] == "VERTEX_SE2":
            vertices[int(parts[1])] = np.array([float(parts[2]), float(parts[3]), float(parts[4])])
        elif parts[0] == "EDGE_SE2":
            i, j = int(parts[1]), int(parts[2])
            z = np.array([float(parts[3]), float(parts[4]), float(parts[5])])
            u = [float(v) for v in parts[6:12]]
            omega = np.array([[u[0], u[1], u[2]], [u[1], u[3], u[4]], [u[2], u[4], u[5]]])
            edges.append((i, j, z, omega))
    graph = PoseGraph()
    id_map: dict[int, int] = {}
    for vid in sorted(vertices):
        if vid in object_ids:
            continue
        id_map[vid] = graph.add_pose(Pose2D.from_vector(vertices[vid]))
    for vid in sorted(object_ids):
        if vid not in vertices:
            raise SchemaViolation(f"OBJECT annotation for missing vertex {vid}")
        graph.add_object(object_ids[vid], Pose2D.from_vector(vertices[vid]))
    for i, j, z, omega in edges:
        if j in object_ids:
            graph.add_object_edge(id_map[i], object_ids[j], Pose2D.from_vector(z), omega)
        elif i in object_ids:
            raise SchemaViolation("object vertex may not be an edge source")
        else:
            graph.add_odom_edge(id_map[i], id_map[j], Pose2D.from_vector(z), omega)
    return graph
