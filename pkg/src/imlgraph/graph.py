"""Graph data model, ingestion, and the community hierarchy.

The in-memory graph is undirected for every downstream computation. Directed
input edges keep a per-edge flag for provenance but are otherwise treated as
undirected. Parallel edges are merged by summing weights, and self-loops are
kept (they contribute to degrees and modularity but never to geometry).
"""

from __future__ import annotations

import colorsys
import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyGraphError, ParseError, UnknownIdError

RGBA = tuple[int, int, int, int]


@dataclass(frozen=True)
class IngestReport:
    """What ingestion changed about the raw input."""

    merged_parallel: int = 0
    self_loops: int = 0


@dataclass
class Graph:
    """An undirected weighted graph with dense integer node ids.

    ``edges`` holds one row per unique undirected edge with ``u <= v``;
    ``weights`` are strictly positive. ``labels[i]`` is the external name of
    node ``i``.
    """

    labels: list[str]
    edges: np.ndarray
    weights: np.ndarray
    directed: np.ndarray
    attributes: list[dict[str, str]] = field(default_factory=list)
    report: IngestReport = field(default_factory=IngestReport)

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def check_node(self, n: int) -> None:
        if not 0 <= n < self.n_nodes:
            raise UnknownIdError(f"unknown node id {n}")

    def degrees(self) -> np.ndarray:
        """Weighted degree per node; a self-loop counts twice.

        With that convention ``degrees().sum() == 2 * total_weight()`` holds
        for every graph, loops included.
        """
        deg = np.zeros(self.n_nodes, dtype=np.float64)
        if self.n_edges:
            np.add.at(deg, self.edges[:, 0], self.weights)
            np.add.at(deg, self.edges[:, 1], self.weights)
        return deg

    def degree(self, n: int) -> float:
        self.check_node(n)
        return float(self.degrees()[n])

    def neighbor_counts(self) -> np.ndarray:
        """Unweighted neighbor count per node, self-loops excluded."""
        cnt = np.zeros(self.n_nodes, dtype=np.int64)
        if self.n_edges:
            plain = self.edges[self.edges[:, 0] != self.edges[:, 1]]
            np.add.at(cnt, plain[:, 0], 1)
            np.add.at(cnt, plain[:, 1], 1)
        return cnt

    def total_weight(self) -> float:
        return float(self.weights.sum()) if self.n_edges else 0.0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.labels == other.labels
            and np.array_equal(self.edges, other.edges)
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.directed, other.directed)
        )

    def to_json(self) -> str:
        """Canonical JSON form: sorted nodes, sorted ``u <= v`` edges."""
        order = np.lexsort((self.edges[:, 1], self.edges[:, 0])) if self.n_edges else []
        nodes = [{"id": i, "label": self.labels[i]} for i in range(self.n_nodes)]
        edges = [
            {
                "u": int(self.edges[i, 0]),
                "v": int(self.edges[i, 1]),
                "w": float(self.weights[i]),
            }
            for i in order
        ]
        return json.dumps({"nodes": nodes, "edges": edges}, separators=(",", ":"))


def _build(
    labels: list[str],
    raw_edges: list[tuple[int, int, float, bool]],
    attributes: list[dict[str, str]] | None = None,
) -> Graph:
    """Canonicalize raw edges: merge parallels, count self-loops."""
    merged: dict[tuple[int, int], list] = {}
    n_parallel = 0
    for u, v, w, d in raw_edges:
        if w <= 0:
            raise ParseError(f"nonpositive weight {w} on edge ({u},{v})")
        key = (u, v) if u <= v else (v, u)
        if key in merged:
            merged[key][0] += w
            merged[key][1] |= d
            n_parallel += 1
        else:
            merged[key] = [w, d]
    keys = sorted(merged)
    edges = np.array(keys, dtype=np.int64).reshape(-1, 2)
    weights = np.array([merged[k][0] for k in keys], dtype=np.float64)
    directed = np.array([merged[k][1] for k in keys], dtype=bool)
    loops = int(np.count_nonzero(edges[:, 0] == edges[:, 1])) if len(keys) else 0
    return Graph(
        labels=labels,
        edges=edges,
        weights=weights,
        directed=directed,
        attributes=attributes or [{} for _ in labels],
        report=IngestReport(merged_parallel=n_parallel, self_loops=loops),
    )


def graph_from_edges(
    n_nodes: int,
    edges: list[tuple[int, int]] | np.ndarray,
    weights: list[float] | np.ndarray | None = None,
    labels: list[str] | None = None,
) -> Graph:
    """Build a graph programmatically from dense integer ids.

    Edges are ``(u, v)`` pairs or ``(u, v, w)`` triples; a separate
    ``weights`` sequence overrides inline weights.
    """
    if labels is None:
        labels = [str(i) for i in range(n_nodes)]
    raw = []
    for i, edge in enumerate(edges):
        u, v = int(edge[0]), int(edge[1])
        if not (0 <= u < n_nodes and 0 <= v < n_nodes):
            raise ParseError(f"edge ({u},{v}) references a node outside 0..{n_nodes - 1}")
        if weights is not None:
            w = float(weights[i])
        elif len(edge) == 3:
            w = float(edge[2])
        else:
            w = 1.0
        raw.append((u, v, w, False))
    return _build(labels, raw)


# ---------------------------------------------------------------------------
# Parsers


def parse_edge_list(text: str) -> Graph:
    """Whitespace-delimited ``u v [w]`` lines; ``#`` starts a comment."""
    ids: dict[str, int] = {}
    raw: list[tuple[int, int, float, bool]] = []

    def intern(tok: str) -> int:
        if tok not in ids:
            ids[tok] = len(ids)
        return ids[tok]

    for ln, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        if len(parts) not in (2, 3):
            raise ParseError("expected 'u v' or 'u v w'", locus=f"line {ln}")
        try:
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError:
            raise ParseError(f"bad weight {parts[2]!r}", locus=f"line {ln}") from None
        raw.append((intern(parts[0]), intern(parts[1]), w, False))
    if not ids:
        raise EmptyGraphError("edge list contains no edges or nodes")
    return _build(list(ids), raw)


def parse_json_graph(text: str) -> Graph:
    """The canonical JSON schema: ``{"nodes": [...], "edges": [...]}``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", locus=f"line {exc.lineno}") from None
    if not isinstance(doc, dict) or "nodes" not in doc:
        raise ParseError("top-level object must contain 'nodes'")
    nodes = doc["nodes"]
    if not nodes:
        raise EmptyGraphError("graph has no nodes")
    labels_by_id: dict[int, str] = {}
    for i, nd in enumerate(nodes):
        try:
            nid = int(nd["id"])
        except (KeyError, TypeError, ValueError):
            raise ParseError("node entry missing integer 'id'", locus=f"nodes[{i}]") from None
        if nid in labels_by_id:
            raise ParseError(f"duplicate node id {nid}", locus=f"nodes[{i}]")
        labels_by_id[nid] = str(nd.get("label", nid))
    n = len(labels_by_id)
    if sorted(labels_by_id) != list(range(n)):
        raise ParseError("node ids must be dense 0..n-1")
    labels = [labels_by_id[i] for i in range(n)]
    raw = []
    for i, ed in enumerate(doc.get("edges", [])):
        try:
            u, v = int(ed["u"]), int(ed["v"])
        except (KeyError, TypeError, ValueError):
            raise ParseError("edge entry missing 'u'/'v'", locus=f"edges[{i}]") from None
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"edge ({u},{v}) references unknown node", locus=f"edges[{i}]")
        raw.append((u, v, float(ed.get("w", 1.0)), bool(ed.get("directed", False))))
    return _build(labels, raw)


_GML_NS = "{http://graphml.graphdrawing.org/xmlns}"


def parse_graphml(text: str) -> Graph:
    """A practical GraphML subset: nodes, edges, weight/label data keys."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise ParseError(f"invalid XML: {exc}", locus="document") from None

    def tag(el: ET.Element) -> str:
        return el.tag.removeprefix(_GML_NS)

    if tag(root) != "graphml":
        raise ParseError(f"expected <graphml> root, got <{tag(root)}>", locus="document")
    weight_keys, label_keys = set(), set()
    for key in root:
        if tag(key) != "key":
            continue
        name = (key.get("attr.name") or "").lower()
        if name == "weight":
            weight_keys.add(key.get("id"))
        elif name in ("label", "name"):
            label_keys.add(key.get("id"))
    graph_el = next((el for el in root if tag(el) == "graph"), None)
    if graph_el is None:
        raise ParseError("no <graph> element", locus="graphml")
    default_directed = graph_el.get("edgedefault", "undirected") == "directed"

    ids: dict[str, int] = {}
    labels: list[str] = []
    attrs: list[dict[str, str]] = []
    raw: list[tuple[int, int, float, bool]] = []
    for el in graph_el:
        t = tag(el)
        if t == "node":
            xid = el.get("id")
            if xid is None:
                raise ParseError("node without id", locus="graph/node")
            if xid in ids:
                raise ParseError(f"duplicate node id {xid!r}", locus=f"node[{xid}]")
            ids[xid] = len(ids)
            label, extra = xid, {}
            for data in el:
                if tag(data) != "data":
                    continue
                k, val = data.get("key"), data.text or ""
                if k in label_keys:
                    label = val
                else:
                    extra[k or ""] = val
            labels.append(label)
            attrs.append(extra)
        elif t == "edge":
            src, dst = el.get("source"), el.get("target")
            if src not in ids or dst not in ids:
                raise ParseError(
                    f"edge references undeclared node ({src!r},{dst!r})",
                    locus=f"edge[{src},{dst}]",
                )
            w = 1.0
            for data in el:
                if tag(data) == "data" and data.get("key") in weight_keys:
                    try:
                        w = float(data.text or "")
                    except ValueError:
                        raise ParseError(
                            f"bad weight {data.text!r}", locus=f"edge[{src},{dst}]"
                        ) from None
            directed = el.get("directed")
            d = default_directed if directed is None else directed == "true"
            raw.append((ids[src], ids[dst], w, d))
    if not ids:
        raise EmptyGraphError("GraphML document declares no nodes")
    return _build(labels, raw, attrs)


_PARSERS = {
    "edges": parse_edge_list,
    "txt": parse_edge_list,
    "el": parse_edge_list,
    "graphml": parse_graphml,
    "xml": parse_graphml,
    "json": parse_json_graph,
}


def load_graph(path: str | Path, fmt: str | None = None) -> Graph:
    """Load a graph file, sniffing the format from the extension."""
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".").lower()
    if fmt not in _PARSERS:
        raise ParseError(f"unsupported graph format {fmt!r}", locus=str(path))
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read graph file: {exc}", locus=str(path)) from None
    return _PARSERS[fmt](text)


def save_graph(g: Graph, path: str | Path) -> None:
    Path(path).write_text(g.to_json())


# ---------------------------------------------------------------------------
# Community hierarchy


@dataclass
class CommunityTree:
    """Rooted community hierarchy over a graph's nodes.

    Communities use their own dense id space. Leaf communities own graph
    nodes through ``members``; internal communities own child communities
    through ``children``. ``depth`` counts hierarchy levels including the
    node layer, so a flat partition under a root has depth 2.
    """

    root: int
    children: dict[int, tuple[int, ...]]
    members: dict[int, tuple[int, ...]]
    parent: dict[int, int]
    node_community: np.ndarray
    depth: int

    def communities(self) -> list[int]:
        return sorted(self.children.keys() | self.members.keys())

    def check_community(self, c: int) -> None:
        if c not in self.children and c not in self.members:
            raise UnknownIdError(f"unknown community id {c}")

    def top_level(self) -> tuple[int, ...]:
        """Communities directly under the root (the root itself if leaf)."""
        kids = self.children.get(self.root, ())
        return kids if kids else (self.root,)

    def level_of(self, c: int) -> int:
        """Edge distance from the root (root itself is level 0)."""
        self.check_community(c)
        level = 0
        while c != self.root:
            c = self.parent[c]
            level += 1
        return level

    def communities_at_level(self, level: int) -> list[int]:
        out = [c for c in self.communities() if self.level_of(c) == level]
        return sorted(out)

    def node_chain(self, n: int) -> list[int]:
        """Communities containing node ``n``, leaf first, root last."""
        if not 0 <= n < len(self.node_community):
            raise UnknownIdError(f"unknown node id {n}")
        c = int(self.node_community[n])
        chain = [c]
        while c != self.root:
            c = self.parent[c]
            chain.append(c)
        return chain

    def leaves_under(self, c: int) -> list[int]:
        """All graph nodes below community ``c``."""
        self.check_community(c)
        if c in self.members:
            return list(self.members[c])
        out: list[int] = []
        stack = [c]
        while stack:
            cur = stack.pop()
            if cur in self.members:
                out.extend(self.members[cur])
            else:
                stack.extend(self.children.get(cur, ()))
        return sorted(out)

    def top_community_of(self, n: int) -> int:
        """The top-level community containing node ``n``."""
        chain = self.node_chain(n)
        if len(chain) == 1:
            return chain[0]
        return chain[-2]

    def to_json(self) -> str:
        def emit(c: int) -> dict:
            doc: dict = {"id": c}
            if c in self.children:
                doc["children"] = [emit(k) for k in self.children[c]]
            else:
                doc["members"] = list(self.members[c])
            return doc

        return json.dumps(emit(self.root), separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "CommunityTree":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}") from None
        children: dict[int, tuple[int, ...]] = {}
        members: dict[int, tuple[int, ...]] = {}
        parent: dict[int, int] = {}
        assign: dict[int, int] = {}

        def walk(node: dict, depth: int) -> tuple[int, int]:
            if "id" not in node:
                raise ParseError("community entry missing 'id'")
            c = int(node["id"])
            if "children" in node and node["children"]:
                max_d = depth
                kids = []
                for sub in node["children"]:
                    k, d = walk(sub, depth + 1)
                    parent[k] = c
                    kids.append(k)
                    max_d = max(max_d, d)
                children[c] = tuple(kids)
                return c, max_d
            mem = tuple(int(m) for m in node.get("members", ()))
            members[c] = mem
            for m in mem:
                if m in assign:
                    raise ParseError(f"node {m} appears in two leaf communities")
                assign[m] = c
            return c, depth + 1

        root, depth = walk(doc, 0)
        if not assign:
            raise ParseError("community tree owns no nodes")
        n = max(assign) + 1
        if sorted(assign) != list(range(n)):
            raise ParseError("community tree must cover dense node ids 0..n-1")
        node_comm = np.array([assign[i] for i in range(n)], dtype=np.int64)
        return cls(root, children, members, parent, node_comm, depth)


@dataclass
class HierarchicalGraph:
    """A graph paired with its community tree and per-community colors."""

    graph: Graph
    tree: CommunityTree
    color_of: dict[int, RGBA]

    @property
    def n_nodes(self) -> int:
        return self.graph.n_nodes


def community_palette(tree: CommunityTree) -> dict[int, RGBA]:
    """Golden-angle hue walk: distinct hues for top-level communities,
    inherited (slightly lightened per level) below."""
    colors: dict[int, RGBA] = {}

    def hsv(h: float, s: float, v: float) -> RGBA:
        r, g, b = colorsys.hsv_to_rgb(h % 1.0, s, v)
        return (int(r * 255), int(g * 255), int(b * 255), 255)

    tops = tree.top_level()
    for i, c in enumerate(sorted(tops)):
        hue = (i * 0.6180339887498949) % 1.0
        colors[c] = hsv(hue, 0.62, 0.92)
        stack = [(k, 1) for k in tree.children.get(c, ())]
        while stack:
            cur, lvl = stack.pop()
            colors[cur] = hsv(hue, max(0.25, 0.62 - 0.12 * lvl), min(1.0, 0.92 + 0.03 * lvl))
            stack.extend((k, lvl + 1) for k in tree.children.get(cur, ()))
    if tree.root not in colors:
        colors[tree.root] = (200, 200, 200, 255)
    return colors


def build_hierarchy(g: Graph, tree: CommunityTree) -> HierarchicalGraph:
    return HierarchicalGraph(g, tree, community_palette(tree))


def validate(h: HierarchicalGraph) -> list[str]:
    """Structural audit; returns human-readable violation strings."""
    g, tree = h.graph, h.tree
    bad: list[str] = []
    for i, (u, v) in enumerate(np.asarray(g.edges).reshape(-1, 2)):
        if not (0 <= u < g.n_nodes and 0 <= v < g.n_nodes):
            bad.append(f"edge {i} references unknown node ({u},{v})")
    for i, w in enumerate(g.weights):
        if not w > 0:
            bad.append(f"nonpositive weight ({int(g.edges[i, 0])},{int(g.edges[i, 1])})")
    if g.n_edges:
        canon = [(min(u, v), max(u, v)) for u, v in g.edges.tolist()]
        if len(set(canon)) != len(canon):
            seen, dupes = set(), set()
            for p in canon:
                if p in seen:
                    dupes.add(p)
                seen.add(p)
            bad.extend(f"duplicate edge {p}" for p in sorted(dupes))

    owned: dict[int, int] = {}
    reached: set[int] = set()
    stack = [tree.root]
    while stack:
        c = stack.pop()
        if c in reached:
            bad.append(f"community {c} reachable twice (cycle or shared child)")
            continue
        reached.add(c)
        if c in tree.children and c in tree.members:
            bad.append(f"community {c} has both children and members")
        for m in tree.members.get(c, ()):
            if m in owned:
                bad.append(f"node {m} in two leaf communities ({owned[m]} and {c})")
            owned[m] = c
        stack.extend(tree.children.get(c, ()))
    for n in range(g.n_nodes):
        if n not in owned:
            bad.append(f"uncovered node {n}")
    all_ids = tree.children.keys() | tree.members.keys()
    for c in all_ids - reached:
        bad.append(f"community {c} unreachable from root")
    tops = tree.top_level()
    top_colors = [h.color_of.get(c) for c in tops]
    if len(set(top_colors)) != len(tops):
        bad.append("top-level community colors are not distinct")
    for c in all_ids:
        if c not in h.color_of:
            bad.append(f"community {c} has no color")
    return bad
