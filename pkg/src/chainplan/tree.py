"""Search trees over composite configurations, and their failure-driven reorganization.

An edge is stored on its child vertex as ``inbound_path``, running from the
parent's configuration to the child's. When the edge contains an IK switch,
``switch_index`` k marks ``inbound_path[k] -> inbound_path[k+1]`` as the jump
(same object pose, different IK class); the child then carries
``need_regrasp`` and, once stage 2 succeeds, the stored regrasp action.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

from .geometry import PlanarPose, pose_distance
from .world import CompositeConfig

log = logging.getLogger("chainplan.tree")


@dataclass(eq=False)
class TreeVertex:
    id: int
    config: CompositeConfig
    inbound_path: list = field(default_factory=list)
    switch_index: int | None = None
    need_regrasp: bool = False
    has_regrasp: bool = False
    regrasp_action: object = None
    regrasp_count: int = 0
    parent: int | None = None
    children: set = field(default_factory=set)

    def switch_pair(self) -> tuple[CompositeConfig, CompositeConfig]:
        k = self.switch_index
        return self.inbound_path[k], self.inbound_path[k + 1]


@dataclass(eq=False)
class Connection:
    """The edge joining the two trees: ``path`` runs from vertex ``b`` to vertex ``a``."""
    a: int
    b: int
    path: list
    switch_index: int | None = None
    need_regrasp: bool = False
    has_regrasp: bool = False
    regrasp_action: object = None
    id: str = "connect"

    def switch_pair(self) -> tuple[CompositeConfig, CompositeConfig]:
        k = self.switch_index
        return self.path[k], self.path[k + 1]


class Tree:
    def __init__(self, root_config: CompositeConfig, ids: Iterator[int], is_start: bool,
                 blacklist: list | None = None):
        self._ids = ids
        self.is_start = is_start
        self.vertices: dict[int, TreeVertex] = {}
        self.blacklist = blacklist if blacklist is not None else []
        root = TreeVertex(next(ids), root_config, [root_config])
        self.vertices[root.id] = root
        self.root = root.id

    def __len__(self) -> int:
        return len(self.vertices)

    def __getitem__(self, vid: int) -> TreeVertex:
        return self.vertices[vid]

    def __contains__(self, vid: int) -> bool:
        return vid in self.vertices

    def add_vertex(self, parent: TreeVertex, config: CompositeConfig, inbound_path: list,
                   switch_index: int | None = None) -> TreeVertex:
        v = TreeVertex(next(self._ids), config, list(inbound_path), switch_index,
                       need_regrasp=switch_index is not None, parent=parent.id,
                       regrasp_count=parent.regrasp_count + (switch_index is not None))
        self.vertices[v.id] = v
        parent.children.add(v.id)
        log.debug("add vertex %d (parent %d, regrasp=%s)", v.id, parent.id, v.need_regrasp)
        return v

    def in_blacklist(self, T: PlanarPose, w_rot: float) -> bool:
        return any(pose_distance(T, c, w_rot) <= r for c, r in self.blacklist)

    def path_to_root(self, vid: int) -> list[int]:
        out = [vid]
        while self.vertices[out[-1]].parent is not None:
            out.append(self.vertices[out[-1]].parent)
        return out

    def recount(self) -> None:
        """Recompute regrasp counts and children sets from parent links."""
        for v in self.vertices.values():
            v.children = set()
        for v in self.vertices.values():
            if v.parent is not None:
                self.vertices[v.parent].children.add(v.id)
        queue = deque([self.root])
        self.vertices[self.root].regrasp_count = 0
        while queue:
            v = self.vertices[queue.popleft()]
            for cid in sorted(v.children):
                c = self.vertices[cid]
                c.regrasp_count = v.regrasp_count + (1 if c.need_regrasp else 0)
                queue.append(cid)


def audit_tree(tree: Tree) -> list[str]:
    """Structural invariant violations (empty when healthy)."""
    problems = []
    roots = [v.id for v in tree.vertices.values() if v.parent is None]
    if roots != [tree.root]:
        problems.append(f"roots {roots} != [{tree.root}]")
    seen = set()
    queue = deque([tree.root])
    while queue:
        vid = queue.popleft()
        if vid in seen:
            problems.append(f"cycle through {vid}")
            continue
        seen.add(vid)
        v = tree.vertices[vid]
        for cid in v.children:
            if cid not in tree.vertices or tree.vertices[cid].parent != vid:
                problems.append(f"bad child link {vid}->{cid}")
            else:
                queue.append(cid)
    if seen != set(tree.vertices):
        problems.append(f"unreachable vertices {sorted(set(tree.vertices) - seen)}")
    for v in tree.vertices.values():
        if v.parent is None:
            continue
        p = tree.vertices.get(v.parent)
        if p is None:
            problems.append(f"vertex {v.id} has missing parent {v.parent}")
            continue
        if v.regrasp_count != p.regrasp_count + (1 if v.need_regrasp else 0):
            problems.append(f"regrasp count mismatch at {v.id}")
        if v.inbound_path[0] != p.config or v.inbound_path[-1] != v.config:
            problems.append(f"inbound path endpoints mismatch at {v.id}")
        if v.has_regrasp and not v.need_regrasp:
            problems.append(f"has_regrasp without need_regrasp at {v.id}")
    return problems


def _reverse_edge_data(path: list, k: int | None):
    rev = list(reversed(path))
    return rev, (None if k is None else len(path) - 2 - k)


def connection_path_from(conn: Connection, vid: int) -> tuple[list, int | None]:
    """The connection's path (and switch index) oriented to start at vertex ``vid``."""
    if vid == conn.b:
        return list(conn.path), conn.switch_index
    return _reverse_edge_data(conn.path, conn.switch_index)


def global_path_vertices(t_start: Tree, t_goal: Tree, conn: Connection) -> list[TreeVertex]:
    """Vertices from the start root to the goal root through the connection."""
    if conn.a in t_start:
        s_end, g_end = conn.a, conn.b
    else:
        s_end, g_end = conn.b, conn.a
    fwd = list(reversed(t_start.path_to_root(s_end)))
    bwd = t_goal.path_to_root(g_end)
    return [t_start[v] for v in fwd] + [t_goal[v] for v in bwd]


def global_edges(t_start: Tree, t_goal: Tree, conn: Connection):
    """Edges along the global path, oriented start -> goal.

    Yields ``(host, path, switch_index, reversed)`` where ``host`` is the vertex
    or connection owning the edge data and ``reversed`` tells whether ``path``
    runs against the stored orientation.
    """
    verts = global_path_vertices(t_start, t_goal, conn)
    s_end = conn.a if conn.a in t_start else conn.b
    out = []
    i = 0
    while verts[i].id != s_end:
        child = verts[i + 1]
        out.append((child, child.inbound_path, child.switch_index, False))
        i += 1
    path, k = connection_path_from(conn, s_end)
    out.append((conn, path, k, s_end != conn.b))
    i += 1
    while i < len(verts) - 1:
        v = verts[i]
        path, k = _reverse_edge_data(v.inbound_path, v.switch_index)
        out.append((v, path, k, True))
        i += 1
    return out


def reorganize(t_f: Tree, t_b: Tree, conn: Connection, v_fail, r_blacklist: float) -> None:
    """Recover from a failed IK switch without discarding explored vertices.

    The edge into ``v_fail`` is dropped and the subtree it roots is re-hung
    from the other tree through the connection edge, reversing the parent
    links on the chain between ``v_fail`` and the connection endpoint. A
    blacklist ball is placed on the failed switch pose (shared by both trees).
    """
    if v_fail is conn:
        center = conn.switch_pair()[0].object_pose
        _blacklist(t_f, t_b, center, r_blacklist)
        log.debug("dropped connection; blacklisted %s", center)
        return
    if v_fail.id in t_f:
        src, dst = t_f, t_b
    else:
        src, dst = t_b, t_f
    e_src = conn.a if conn.a in src else conn.b
    e_dst = conn.b if e_src == conn.a else conn.a
    center = v_fail.switch_pair()[0].object_pose if v_fail.switch_index is not None \
        else v_fail.config.object_pose

    chain = src.path_to_root(e_src)
    chain = chain[:chain.index(v_fail.id) + 1]  # e_src ... v_fail

    subtree = []
    stack = [v_fail.id]
    while stack:
        vid = stack.pop()
        subtree.append(vid)
        stack.extend(sorted(src[vid].children))

    # reverse edges along the chain: (child u, parent p) becomes p child of u
    edges = [(u, p, src[u].inbound_path, src[u].switch_index, src[u].need_regrasp,
              src[u].has_regrasp, src[u].regrasp_action) for u, p in zip(chain[:-1], chain[1:])]
    for u, p, path, k, need, has, action in edges:
        vp = src[p]
        vp.parent = u
        vp.inbound_path, vp.switch_index = _reverse_edge_data(path, k)
        vp.need_regrasp, vp.has_regrasp = need, has
        vp.regrasp_action = _reverse_action(action)
    head = src[e_src]
    head.parent = e_dst
    head.inbound_path, head.switch_index = connection_path_from(conn, e_dst)
    head.need_regrasp, head.has_regrasp = conn.need_regrasp, conn.has_regrasp
    head.regrasp_action = None if conn.regrasp_action is None else (
        conn.regrasp_action if e_dst == conn.b else _reverse_action(conn.regrasp_action))

    for vid in subtree:
        dst.vertices[vid] = src.vertices.pop(vid)
    dst.recount()
    src.recount()
    _blacklist(t_f, t_b, center, r_blacklist)
    log.debug("reorganized: moved %d vertices; blacklisted %s", len(subtree), center)


def _blacklist(t_f: Tree, t_b: Tree, center: PlanarPose, radius: float) -> None:
    t_f.blacklist.append((center, radius))
    if t_b.blacklist is not t_f.blacklist:
        t_b.blacklist.append((center, radius))


def _reverse_action(action):
    return None if action is None else action.reversed()
