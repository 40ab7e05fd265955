"""Nearest-head clustering and cluster distance geometry.

Every normal node joins the cluster head minimizing Euclidean distance
(ties to the lowest head id), which partitions the field into the heads'
nearest-site cells. The geometry bundle collects all distances the
accuracy estimators consume.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .deployment import Deployment, Position, TracingPoint
from .errors import NoHeadsError, UnknownNodeError
from .spatial_stats import CorrelationParams, kernel


@dataclass(frozen=True)
class Cluster:
    head_id: int
    members: Tuple[int, ...]  # normal-node ids, ascending

    @property
    def m(self) -> int:
        """Cluster size counting the head itself."""
        return len(self.members) + 1


@dataclass(frozen=True)
class ClusterAssignment:
    clusters: Tuple[Cluster, ...]  # one per head, ascending head id

    @property
    def by_head(self) -> Dict[int, Cluster]:
        return {c.head_id: c for c in self.clusters}


def assign_clusters(deployment: Deployment) -> ClusterAssignment:
    """Assign each normal node to its nearest cluster head.

    Deterministic and idempotent; ties go to the lowest head id, and heads
    with no members stay as m = 1 clusters since the head still senses on
    its own. Distances use hypot, not squared sums, so subnormal offsets
    cannot underflow into false ties.
    """
    if not deployment.heads:
        raise NoHeadsError("deployment has no cluster heads")
    heads = sorted(deployment.heads, key=lambda n: n.id)
    members: Dict[int, list] = {h.id: [] for h in heads}
    for node in sorted(deployment.normals, key=lambda n: n.id):
        best = min(heads, key=lambda h: node.position.distance_to(h.position))
        members[best.id].append(node.id)
    return ClusterAssignment(tuple(
        Cluster(head_id=h.id, members=tuple(members[h.id])) for h in heads
    ))


@dataclass(frozen=True)
class ClusterGeometry:
    """Distances between the tracing point, the head, and the members.

    `member_distances[i, j]` is the distance between members i and j in
    `member_ids` order (symmetric, zero diagonal).
    """

    head_id: int
    member_ids: Tuple[int, ...]
    tracing_to_members: np.ndarray   # (m-1,)
    tracing_to_head: float
    head_to_members: np.ndarray      # (m-1,)
    member_distances: np.ndarray     # (m-1, m-1)

    @property
    def m(self) -> int:
        return len(self.member_ids) + 1

    def joint_distances(self) -> np.ndarray:
        """(m+1) x (m+1) distance matrix over (tracing point, members..., head)."""
        k = len(self.member_ids)
        d = np.zeros((k + 2, k + 2))
        d[0, 1:k + 1] = self.tracing_to_members
        d[0, k + 1] = self.tracing_to_head
        d[1:k + 1, 1:k + 1] = self.member_distances
        d[1:k + 1, k + 1] = self.head_to_members
        return np.maximum(d, d.T)


def geometry_from_points(tracing: Position, head: Position,
                         members: Sequence[Position],
                         head_id: int = 0,
                         member_ids: Optional[Sequence[int]] = None,
                         ) -> ClusterGeometry:
    """Build the distance bundle from explicit coordinates."""
    s = np.array([tracing.x, tracing.y])
    h = np.array([head.x, head.y])
    mem = np.array([[p.x, p.y] for p in members]).reshape(-1, 2)
    if member_ids is None:
        member_ids = tuple(range(1, len(members) + 1))
    diff = mem[:, None, :] - mem[None, :, :]
    return ClusterGeometry(
        head_id=head_id,
        member_ids=tuple(member_ids),
        tracing_to_members=np.linalg.norm(mem - s, axis=1),
        tracing_to_head=float(np.linalg.norm(h - s)),
        head_to_members=np.linalg.norm(mem - h, axis=1),
        member_distances=np.linalg.norm(diff, axis=2),
    )


def cluster_geometry(cluster: Cluster, deployment: Deployment,
                     tracing_point: TracingPoint) -> ClusterGeometry:
    """Distance bundle for a deployed cluster against one tracing point."""
    try:
        head = deployment.head_by_id(cluster.head_id)
        members = [deployment.normal_by_id(i) for i in cluster.members]
    except KeyError as exc:
        raise UnknownNodeError(f"node id {exc.args[0]} not in deployment") from exc
    return geometry_from_points(
        tracing_point.position, head.position, [n.position for n in members],
        head_id=cluster.head_id, member_ids=cluster.members,
    )


def assignment_kernel_diagnostics(assignment: ClusterAssignment,
                                  deployment: Deployment,
                                  params: CorrelationParams) -> Dict[int, float]:
    """Kernel value of each normal node's distance to its head.

    Nodes are always assigned to the nearest head, even when that kernel
    falls below tau; this map makes weakly correlated members visible.
    """
    out: Dict[int, float] = {}
    for cluster in assignment.clusters:
        head = deployment.head_by_id(cluster.head_id)
        for nid in cluster.members:
            node = deployment.normal_by_id(nid)
            out[nid] = float(kernel(node.position.distance_to(head.position), params))
    return out


def assignment_to_csv(assignment: ClusterAssignment) -> str:
    """CSV with one row per head: head label, semicolon-joined member ids."""
    lines = ["head,members"]
    for cluster in assignment.clusters:
        lines.append(f"CH{cluster.head_id},{';'.join(str(i) for i in cluster.members)}")
    return "\n".join(lines) + "\n"
