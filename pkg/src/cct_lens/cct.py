"""Calling context trees built from enter/exit event streams.

A calling context tree (CCT) keeps one node per method *in its calling
context*: calls to the same method from the same parent context merge
into a single node, while recursion produces a chain of distinct nodes,
one per depth.  Each thread gets its own tree under a synthetic root
labelled ``<root:tid>``; a merged view overlays the per-thread trees
method-by-method under a single ``<root>``.

Node times are inclusive nanoseconds.  Self time is derived, never
stored: ``total_time`` minus the children's ``total_time``.  Root nodes
carry the thread's busy time (the sum of their top-level children), so
time conservation holds exactly on every tree.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

from .trace import ENTER, EXIT, TraceEvent, TraceStructureError

MERGED_ROOT = "<root>"

_CCT_FORMAT = "cct-lens/cct@1"
_FOREST_FORMAT = "cct-lens/forest@1"


def root_label(tid: int) -> str:
    return f"<root:{tid}>"


class CctNode:
    """One method in one calling context.

    ``children`` maps method name to child node in first-encounter order.
    ``truncated`` marks frames that were force-closed by lenient recovery
    rather than by an observed exit.
    """

    __slots__ = ("method", "invocations", "total_time", "truncated", "children")

    def __init__(self, method: str, invocations: int = 0, total_time: int = 0,
                 truncated: bool = False):
        self.method = method
        self.invocations = invocations
        self.total_time = total_time
        self.truncated = truncated
        self.children: dict[str, CctNode] = {}

    def self_time(self) -> int:
        return self.total_time - sum(c.total_time for c in self.children.values())

    def walk(self) -> Iterator["CctNode"]:
        """Iterative preorder walk over this node and all descendants."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            # reversed so children come off the stack in encounter order
            stack.extend(reversed(list(node.children.values())))

    def node_count(self) -> int:
        return sum(1 for _ in self.walk())

    def __eq__(self, other) -> bool:
        if not isinstance(other, CctNode):
            return NotImplemented
        if (self.method, self.invocations, self.total_time, self.truncated) != (
            other.method, other.invocations, other.total_time, other.truncated
        ):
            return False
        return self.children == other.children

    def __repr__(self) -> str:
        return (f"CctNode({self.method!r}, inv={self.invocations}, "
                f"total={self.total_time}, children={len(self.children)})")


def self_time(node: CctNode) -> int:
    return node.self_time()


@dataclass
class CctForest:
    """Per-thread trees plus a lazily computed merged view."""

    roots: dict[int, CctNode] = field(default_factory=dict)
    _merged: CctNode | None = field(default=None, repr=False, compare=False)

    def merged(self) -> CctNode:
        if self._merged is None:
            self._merged = merge_ccts(self)
        return self._merged

    def tids(self) -> list[int]:
        return sorted(self.roots)


class _ThreadState:
    __slots__ = ("root", "stack", "last_ts", "count")

    def __init__(self, tid: int):
        self.root = CctNode(root_label(tid), invocations=1)
        # frames as (node, enter_ts); root is not on the stack
        self.stack: list[tuple[CctNode, int]] = []
        # None until the first event: origins may be negative
        self.last_ts: int | None = None
        self.count = 0


def _finish_thread(state: _ThreadState, tid: int, lenient: bool,
                   warn: Callable[[str], None] | None) -> CctNode:
    if state.stack:
        if not lenient:
            top = state.stack[-1][0]
            raise TraceStructureError(
                f"{len(state.stack)} frame(s) still open at end of trace "
                f"(innermost: {top.method})",
                tid=tid,
            )
        if warn is not None:
            warn(f"tid {tid}: closed {len(state.stack)} frame(s) left open "
                 f"at end of trace (ts {state.last_ts})")
        # close open frames at the last observed timestamp, innermost first
        for node, enter_ts in reversed(state.stack):
            node.total_time += state.last_ts - enter_ts
            node.truncated = True
        state.stack.clear()
    state.root.total_time = sum(c.total_time for c in state.root.children.values())
    return state.root


def build_forest(events: Iterable[TraceEvent], lenient: bool = False,
                 max_depth: int | None = None,
                 warn: Callable[[str], None] | None = None) -> CctForest:
    """Build per-thread CCTs from an interleaved event stream in one pass.

    Events must be in file order (per-thread subsequences ordered).  Memory
    is proportional to the number of distinct calling contexts plus open
    stack depth, not to the event count.

    Strict mode raises TraceStructureError on orphan exits, mismatched
    exits, frames left open at end of input, or per-thread timestamp
    regressions.  Lenient mode drops orphan and mismatched exits, clamps
    regressing timestamps to the running maximum, and closes frames left
    open at the thread's last observed timestamp, marking them truncated.

    ``max_depth`` caps the open-frame depth per thread and aborts when
    exceeded; it guards against pathological or corrupt inputs.
    """
    states: dict[int, _ThreadState] = {}
    for index, event in enumerate(events):
        ts, tid, kind, method = event
        state = states.get(tid)
        if state is None:
            state = states[tid] = _ThreadState(tid)
        if state.last_ts is not None and ts < state.last_ts:
            if not lenient:
                raise TraceStructureError(
                    f"timestamp regression {state.last_ts} -> {ts} at event {index}",
                    tid=tid,
                )
            if warn is not None:
                warn(f"tid {tid}: clamped timestamp regression "
                     f"{state.last_ts} -> {ts} at event {index}")
            ts = state.last_ts
        else:
            state.last_ts = ts
        stack = state.stack
        if kind == ENTER:
            parent = stack[-1][0] if stack else state.root
            node = parent.children.get(method)
            if node is None:
                node = parent.children[method] = CctNode(method)
            node.invocations += 1
            stack.append((node, ts))
            if max_depth is not None and len(stack) > max_depth:
                raise TraceStructureError(
                    f"call depth exceeded cap of {max_depth} at event {index}",
                    tid=tid,
                )
        else:
            if not stack:
                if not lenient:
                    raise TraceStructureError(
                        f"orphan exit for {method} at event {index} (empty stack)",
                        tid=tid,
                    )
                if warn is not None:
                    warn(f"tid {tid}: dropped orphan exit for {method} at event {index}")
                continue
            node, enter_ts = stack[-1]
            if node.method != method:
                if not lenient:
                    raise TraceStructureError(
                        f"mismatched exit at event {index}: got {method}, "
                        f"innermost open frame is {node.method}",
                        tid=tid,
                    )
                if warn is not None:
                    warn(f"tid {tid}: dropped mismatched exit for {method} at "
                         f"event {index} (innermost open frame: {node.method})")
                continue
            stack.pop()
            node.total_time += ts - enter_ts
    forest = CctForest()
    for tid in states:
        forest.roots[tid] = _finish_thread(states[tid], tid, lenient, warn)
    return forest


def build_cct(events: Iterable[TraceEvent], tid: int | None = None,
              lenient: bool = False, max_depth: int | None = None) -> CctNode:
    """Build a single thread's CCT from its ordered event sequence.

    ``tid`` names the synthetic root; when omitted it is taken from the
    first event (0 for an empty sequence).
    """
    events = list(events)
    if tid is None:
        tid = events[0].tid if events else 0
    forest = build_forest(events, lenient=lenient, max_depth=max_depth)
    if not forest.roots:
        return CctNode(root_label(tid), invocations=1)
    if list(forest.roots) != [tid]:
        raise ValueError(f"expected events for tid {tid} only, saw tids {forest.tids()}")
    return forest.roots[tid]


def _merge_child_into(dst: CctNode, src: CctNode) -> None:
    # iterative overlay: counts and times add, children unite by method
    work = [(dst, src)]
    while work:
        d, s = work.pop()
        d.invocations += s.invocations
        d.total_time += s.total_time
        d.truncated = d.truncated or s.truncated
        for method, child in s.children.items():
            target = d.children.get(method)
            if target is None:
                target = d.children[method] = CctNode(method)
            work.append((target, child))


def merge_ccts(forest: CctForest) -> CctNode:
    """Overlay per-thread trees into one tree under a ``<root>`` node.

    Threads are folded in ascending tid order, so child order in the
    merged tree is deterministic.  The merged root's total is the summed
    busy time of all threads.
    """
    merged = CctNode(MERGED_ROOT, invocations=1)
    for tid in sorted(forest.roots):
        for method, child in forest.roots[tid].children.items():
            target = merged.children.get(method)
            if target is None:
                target = merged.children[method] = CctNode(method)
            _merge_child_into(target, child)
    merged.total_time = sum(c.total_time for c in merged.children.values())
    return merged


@dataclass(frozen=True)
class CallGraphEdge:
    caller: str
    callee: str
    calls: int
    callee_total_time: int


def project_call_graph(root: CctNode) -> list[CallGraphEdge]:
    """Collapse a CCT to caller->callee edges, summing over contexts.

    The synthetic root appears as caller for top-level methods.  Edges are
    sorted by descending call count, then caller, then callee.
    """
    acc: dict[tuple[str, str], list[int]] = {}
    for node in root.walk():
        for child in node.children.values():
            cell = acc.get((node.method, child.method))
            if cell is None:
                cell = acc[(node.method, child.method)] = [0, 0]
            cell[0] += child.invocations
            cell[1] += child.total_time
    edges = [
        CallGraphEdge(caller, callee, calls, total)
        for (caller, callee), (calls, total) in acc.items()
    ]
    edges.sort(key=lambda e: (-e.calls, e.caller, e.callee))
    return edges


def folded_stacks(root: CctNode) -> list[str]:
    """Flame-graph style folded lines: ``m1;m2;...;mN <self_ns>``.

    One line per non-root node, preorder, with the synthetic root omitted
    from the path.  Self time may be zero; lines are still emitted so the
    output enumerates every context.
    """
    lines: list[str] = []
    # stack of (node, path-prefix)
    stack: list[tuple[CctNode, str]] = [
        (child, child.method) for child in reversed(root.children.values())
    ]
    while stack:
        node, path = stack.pop()
        lines.append(f"{path} {node.self_time()}")
        for child in reversed(node.children.values()):
            stack.append((child, f"{path};{child.method}"))
    return lines


def _node_to_obj(node: CctNode) -> dict:
    obj: dict = {"m": node.method, "inv": node.invocations, "ns": node.total_time}
    if node.truncated:
        obj["trunc"] = True
    if node.children:
        obj["ch"] = [_node_to_obj(c) for c in node.children.values()]
    return obj


def _node_from_obj(obj: dict) -> CctNode:
    if not isinstance(obj, dict) or "m" not in obj:
        raise ValueError("malformed CCT node object")
    node = CctNode(
        obj["m"],
        invocations=int(obj.get("inv", 0)),
        total_time=int(obj.get("ns", 0)),
        truncated=bool(obj.get("trunc", False)),
    )
    for child_obj in obj.get("ch", []):
        child = _node_from_obj(child_obj)
        if child.method in node.children:
            raise ValueError(f"duplicate child method {child.method!r}")
        node.children[child.method] = child
    return node


def serialize_cct(root: CctNode) -> str:
    """Lossless JSON form of one tree (structure, counts, times, flags)."""
    doc = {"format": _CCT_FORMAT, "tree": _node_to_obj(root)}
    return json.dumps(doc, separators=(",", ":"))


def deserialize_cct(text: str) -> CctNode:
    doc = json.loads(text)
    if not isinstance(doc, dict) or doc.get("format") != _CCT_FORMAT:
        raise ValueError(f"not a {_CCT_FORMAT} document")
    if "tree" not in doc:
        raise ValueError("document has no tree")
    return _node_from_obj(doc["tree"])


def serialize_forest(forest: CctForest) -> str:
    doc = {
        "format": _FOREST_FORMAT,
        "threads": {str(tid): _node_to_obj(forest.roots[tid]) for tid in sorted(forest.roots)},
    }
    return json.dumps(doc, separators=(",", ":"))


def deserialize_forest(text: str) -> CctForest:
    doc = json.loads(text)
    if not isinstance(doc, dict) or doc.get("format") != _FOREST_FORMAT:
        raise ValueError(f"not a {_FOREST_FORMAT} document")
    if not isinstance(doc.get("threads"), dict):
        raise ValueError("document has no threads table")
    forest = CctForest()
    for tid_str, obj in doc["threads"].items():
        forest.roots[int(tid_str)] = _node_from_obj(obj)
    return forest
