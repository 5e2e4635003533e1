"""Anytime tree searches over a shared transposition table.

Values are always from the first player's point of view: the first player
maximizes, the second minimizes. Non-terminal leaves are valued by an
adaptive evaluator ``f_theta`` (anything with ``evaluate(states) -> array``)
and terminal states by a terminal evaluator ``f_t(state, ctx)``.

The best-first family (UBFM, descent, their completed versions and UBFM_s)
shares one engine, :class:`BestFirst`. Completion compares children by the
pair (resolution value r, value) instead of the value alone; r is +1/-1 for
proven first/second-player wins and 0 otherwise, with ``resolved`` telling a
proven draw from an unknown state.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from .evaluation import MatchContext
from .games import FIRST, Game, GameState

INF = math.inf


# -- budgets ------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchBudget:
    """How long a search may run: ``iterations``, ``nodes`` (evaluated states) or ``seconds``.

    For alpha-beta an iteration is one deepening step; for the best-first
    searches and MCTS it is one root-to-leaf walk.
    """

    mode: str
    amount: float

    def __post_init__(self):
        if self.mode not in ("iterations", "nodes", "seconds"):
            raise ValueError(f"budget mode must be iterations, nodes or seconds, got {self.mode!r}")
        if not self.amount > 0:
            raise ValueError(f"search budget must be positive, got {self.amount}")

    @classmethod
    def iterations(cls, n: int) -> "SearchBudget":
        return cls("iterations", n)

    @classmethod
    def nodes(cls, n: int) -> "SearchBudget":
        return cls("nodes", n)

    @classmethod
    def seconds(cls, t: float) -> "SearchBudget":
        return cls("seconds", t)

    @classmethod
    def parse(cls, text: str) -> "SearchBudget":
        """``"500"`` or ``"500it"`` (iterations), ``"2000n"`` (nodes), ``"1.5s"`` (seconds)."""
        text = text.strip().lower()
        for suffix, mode in (("it", "iterations"), ("n", "nodes"), ("s", "seconds")):
            if text.endswith(suffix):
                num = text[: -len(suffix)]
                break
        else:
            num, mode = text, "iterations"
        try:
            value = float(num)
        except ValueError:
            raise ValueError(f"budget: expected N, Nit, Nn or Xs, got {text!r}") from None
        return cls(mode, value if mode == "seconds" else int(value))


class _Meter:
    def __init__(self, budget: SearchBudget):
        self.budget = budget
        self.iterations = 0
        self.nodes = 0
        self.start = time.perf_counter()

    def exhausted(self) -> bool:
        b = self.budget
        if b.mode == "iterations":
            return self.iterations >= b.amount
        if b.mode == "nodes":
            return self.nodes >= b.amount
        return time.perf_counter() - self.start >= b.amount


class _OutOfBudget(Exception):
    pass


class _Leaves:
    """Per-search memo around ``f_theta``; the evaluator is frozen during a search."""

    def __init__(self, f_theta, meter: _Meter):
        self.f = f_theta
        self.meter = meter
        self.cache: dict[int, float] = {}

    def values(self, states) -> list[float]:
        cache = self.cache
        missing = [s for s in states if s.key not in cache]
        if missing:
            uniq = list({s.key: s for s in missing}.values())
            vals = self.f.evaluate(uniq)
            for s, v in zip(uniq, vals.tolist()):
                cache[s.key] = v
            self.meter.nodes += len(uniq)
        return [cache[s.key] for s in states]


# -- table ---------------------------------------------------------------------------


class Node:
    """Table record. ``vp[i]`` is v'(s, a_i); ``cr``/``cres`` snapshot the children's resolution."""

    __slots__ = ("state", "v", "r", "resolved", "terminal", "actions", "children", "vp", "cr", "cres", "n")

    def __init__(self, state: GameState, v: float, r: int = 0, resolved: bool = False, terminal: bool = False):
        self.state = state
        self.v = v
        self.r = r
        self.resolved = resolved
        self.terminal = terminal
        self.actions = None
        self.children = None
        self.vp = None
        self.cr = None
        self.cres = None
        self.n = None

    @property
    def expanded(self) -> bool:
        return self.actions is not None

    def __repr__(self):
        flag = "resolved" if self.resolved else "open"
        return f"Node(v={self.v:.4g}, r={self.r}, {flag}, ply={self.state.ply})"


class SearchTable:
    """Transposition table: state key -> :class:`Node`.

    Holds every expanded state and every terminal state met during search,
    i.e. exactly the states tree learning trains on. It lives for one game.
    """

    def __init__(self):
        self.nodes: dict[int, Node] = {}

    def __len__(self):
        return len(self.nodes)

    def __contains__(self, key):
        return key in self.nodes

    def get(self, key) -> Node | None:
        return self.nodes.get(key)

    def clear(self):
        self.nodes.clear()

    def learning_pairs(self) -> list[tuple[GameState, float]]:
        return [(node.state, node.v) for node in self.nodes.values()]

    def check(self, completion: bool = False) -> list[str]:
        """Return violations of the v = extremum(v') invariant (empty when consistent)."""
        bad = []
        for key, node in self.nodes.items():
            if not node.expanded:
                continue
            best = _best_index(node, completion, node.state.to_move == FIRST)
            if node.v != node.vp[best]:
                bad.append(f"{key:#018x}: v={node.v} but best v'={node.vp[best]}")
            if any(c < 0 for c in node.n):
                bad.append(f"{key:#018x}: negative count")
        return bad


def _better(a, b, first: bool) -> bool:
    return a > b if first else a < b


def _best_index(node: Node, completion: bool, first: bool, open_only: bool = False) -> int:
    """Canonical-order-first argmax (first player) / argmin (second) of v' or (r, v')."""
    vp = node.vp
    best = -1
    best_key = None
    for i in range(len(vp)):
        if open_only and node.cres[i]:
            continue
        k = (node.cr[i], vp[i]) if completion else vp[i]
        if best < 0 or _better(k, best_key, first):
            best, best_key = i, k
    return best


def _safest_index(node: Node, counts, first: bool) -> int:
    best = 0
    best_key = None
    for i in range(len(node.vp)):
        k = (node.cr[i], counts[i], node.vp[i]) if first else (node.cr[i], -counts[i], node.vp[i])
        if best_key is None or _better(k, best_key, first):
            best, best_key = i, k
    return best


# -- results -------------------------------------------------------------------------


@dataclass
class SearchResult:
    action: int
    value: float
    actions: list
    child_values: list
    child_r: list | None = None
    counts: list | None = None
    resolved: bool = False
    r: int = 0
    iterations: int = 0
    nodes: int = 0
    touched: set = field(default_factory=set)
    pairs: list | None = None


# -- best-first family ---------------------------------------------------------------


class BestFirst:
    """UBFM-style search engine.

    descent
        keep walking best children past the freshly expanded node until a
        terminal state (descent) instead of stopping there (UBFM).
    completion
        order children by (r, v'), stop once the root is resolved and never
        walk into a resolved child.
    count
        maintain selection counts n(s, a) (UBFM_s).
    """

    def __init__(self, game: Game, f_theta, f_t, *, descent: bool = False, completion: bool = False,
                 count: bool = False, trace=None):
        self.game = game
        self.f_theta = f_theta
        self.f_t = f_t
        self.descent = descent
        self.completion = completion
        self.count = count
        self.trace = trace

    # node construction
    def _terminal_node(self, table, state, ctx) -> Node:
        node = table.get(state.key)
        if node is None:
            node = Node(state, self.f_t(state, ctx), state.outcome, True, True)
            table.nodes[state.key] = node
        return node

    def _expand(self, table, state, ctx, leaves) -> Node:
        game = self.game
        actions = game.legal_actions(state)
        children = [game.apply(state, a) for a in actions]
        child_ctx = ctx.after_turn(state.to_move, len(actions))
        vp = [0.0] * len(children)
        cr = [0] * len(children)
        cres = [False] * len(children)
        open_idx = []
        for i, c in enumerate(children):
            if c.outcome is not None:
                t = self._terminal_node(table, c, child_ctx)
                vp[i], cr[i], cres[i] = t.v, t.r, True
            else:
                open_idx.append(i)
                known = table.get(c.key)
                if known is not None:
                    cr[i], cres[i] = known.r, known.resolved
        resolved_known = [i for i in open_idx if cres[i]]
        for i in resolved_known:
            vp[i] = table.nodes[children[i].key].v
        open_idx = [i for i in open_idx if not cres[i]]
        if open_idx:
            for i, v in zip(open_idx, leaves.values([children[i] for i in open_idx])):
                vp[i] = v
        node = table.get(state.key)
        if node is None:
            node = Node(state, 0.0)
            table.nodes[state.key] = node
        node.actions, node.children, node.vp, node.cr, node.cres = actions, children, vp, cr, cres
        node.n = [0] * len(actions)
        self._refresh_value(node)
        return node

    def _refresh_children(self, table, node):
        # resolved children are never walked again, so their final value is pulled here
        get = table.nodes.get
        for i, c in enumerate(node.children):
            k = get(c.key)
            if k is not None:
                node.cr[i], node.cres[i] = k.r, k.resolved
                if k.resolved:
                    node.vp[i] = k.v

    def _refresh_value(self, node: Node):
        first = node.state.to_move == FIRST
        best = _best_index(node, self.completion, first)
        node.v = node.vp[best]
        win = 1 if first else -1
        if any(res and r == win for r, res in zip(node.cr, node.cres)):
            node.r, node.resolved = win, True
        elif all(node.cres):
            node.r, node.resolved = (max if first else min)(node.cr), True
        else:
            node.r, node.resolved = 0, False

    def iteration(self, root: GameState, table: SearchTable, ctx: MatchContext, leaves: _Leaves, touched=None):
        """One walk from the root; returns whether it expanded or changed anything."""
        game = self.game
        state = root
        path = []
        expanded = 0
        while True:
            if state.outcome is not None:
                self._terminal_node(table, state, ctx)
                break
            node = table.get(state.key)
            fresh = node is None or not node.expanded
            if fresh:
                node = self._expand(table, state, ctx, leaves)
                expanded += 1
                if not self.descent:
                    break
            if self.completion and node.resolved:
                break
            if not fresh:
                self._refresh_children(table, node)
            first = state.to_move == FIRST
            idx = _best_index(node, self.completion, first, open_only=self.completion)
            if self.count and not fresh:
                node.n[idx] += 1
            path.append((node, idx))
            ctx = ctx.after_turn(state.to_move, len(node.actions))
            state = node.children[idx]
        if touched is not None:
            touched.add(state.key)
        changed = expanded > 0
        for node, idx in reversed(path):
            child = table.nodes[node.children[idx].key]
            before = (node.v, node.vp[idx], node.r, node.resolved)
            node.vp[idx] = child.v
            node.cr[idx], node.cres[idx] = child.r, child.resolved
            self._refresh_value(node)
            if not changed and (node.v, child.v, node.r, node.resolved) != before:
                changed = True
            if touched is not None:
                touched.add(node.state.key)
        if self.trace is not None:
            self.trace({
                "path": [game.action_to_str(n.actions[i]) for n, i in path],
                "values": [n.v for n, _ in path] + [table.nodes[state.key].v],
                "expanded": expanded,
            })
        return changed

    def run(self, root: GameState, table: SearchTable, budget: SearchBudget,
            ctx: MatchContext = MatchContext()) -> SearchResult:
        if root.outcome is not None:
            raise ValueError("search root must be non-terminal")
        meter = _Meter(budget)
        leaves = _Leaves(self.f_theta, meter)
        touched: set = set()
        start_counts = None
        known = table.get(root.key)
        if known is not None and known.expanded:
            start_counts = list(known.n)
        while not meter.exhausted():
            node = table.get(root.key)
            if self.completion and node is not None and node.resolved:
                break
            changed = self.iteration(root, table, ctx, leaves, touched)
            meter.iterations += 1
            if not changed and not self.count:
                # fixed point: every later walk would repeat this one
                break
        node = table.get(root.key)
        if node is None or not node.expanded:
            node = self._expand(table, root, ctx, leaves)
        self._refresh_children(table, node)
        self._refresh_value(node)
        first = root.to_move == FIRST
        counts = list(node.n)
        if start_counts is not None:
            counts = [a - b for a, b in zip(counts, start_counts)]
        if self.count:
            idx = _safest_index(node, counts, first)
        else:
            idx = _best_index(node, self.completion, first)
        return SearchResult(
            action=node.actions[idx], value=node.v, actions=list(node.actions), child_values=list(node.vp),
            child_r=[r if res else 0 for r, res in zip(node.cr, node.cres)], counts=counts,
            resolved=node.resolved, r=node.r, iterations=meter.iterations, nodes=meter.nodes, touched=touched,
        )


def ubfm(game, root, table, f_theta, f_t, budget, ctx=MatchContext(), completion=False, trace=None):
    return BestFirst(game, f_theta, f_t, completion=completion, trace=trace).run(root, table, budget, ctx)


def descent(game, root, table, f_theta, f_t, budget, ctx=MatchContext(), trace=None):
    return BestFirst(game, f_theta, f_t, descent=True, trace=trace).run(root, table, budget, ctx)


def completed_descent(game, root, table, f_theta, f_t, budget, ctx=MatchContext(), trace=None):
    return BestFirst(game, f_theta, f_t, descent=True, completion=True, trace=trace).run(root, table, budget, ctx)


def ubfm_s(game, root, table, f_theta, f_t, budget, ctx=MatchContext(), trace=None):
    return BestFirst(game, f_theta, f_t, completion=True, count=True, trace=trace).run(root, table, budget, ctx)


# -- iterative deepening alpha-beta -------------------------------------------------------


class AlphaBeta:
    """Fail-soft alpha-beta with iterative deepening and best-move ordering.

    Frontier nodes (depth 1) evaluate all their children in one batch.
    States whose value was exact within the window in the deepest completed
    search are written to ``table`` for tree learning.
    """

    def __init__(self, game: Game, f_theta, f_t, trace=None):
        self.game = game
        self.f_theta = f_theta
        self.f_t = f_t
        self.trace = trace

    def _search(self, state, depth, alpha, beta, ctx):
        game = self.game
        if state.outcome is not None:
            v = self.f_t(state, ctx)
            self._exact[state.key] = (state, v)
            return v
        self._visits += 1
        if self._guard and self._meter.budget.mode != "iterations" and self._meter.exhausted():
            raise _OutOfBudget
        actions = game.legal_actions(state)
        first = state.to_move == FIRST
        hint = self._order.get(state.key)
        order = list(range(len(actions)))
        if hint is not None and 0 <= hint < len(actions):
            order.remove(hint)
            order.insert(0, hint)
        child_ctx = ctx.after_turn(state.to_move, len(actions))
        children = [game.apply(state, actions[i]) for i in order]
        a0, b0 = alpha, beta
        if depth == 1:
            open_ = [c for c in children if c.outcome is None]
            if open_:
                self._cut = True
            vals = dict(zip((c.key for c in open_), self._leaves.values(open_)))
        best, best_i = (-INF if first else INF), order[0]
        for i, child in zip(order, children):
            if depth == 1 and child.outcome is None:
                v = vals[child.key]
            else:
                v = self._search(child, depth - 1, alpha, beta, child_ctx)
            if _better(v, best, first):
                best, best_i = v, i
            if first:
                alpha = max(alpha, v)
            else:
                beta = min(beta, v)
            if alpha >= beta:
                break
        self._order[state.key] = best_i
        if a0 < best < b0:
            self._exact[state.key] = (state, best)
        return best

    def _root(self, root, depth, ctx):
        game = self.game
        actions = game.legal_actions(root)
        first = root.to_move == FIRST
        order = list(range(len(actions)))
        if self._pv is not None:
            order.remove(self._pv)
            order.insert(0, self._pv)
        child_ctx = ctx.after_turn(root.to_move, len(actions))
        values = [0.0] * len(actions)
        alpha, beta = -INF, INF
        best, best_i = (-INF if first else INF), order[0]
        children = [game.apply(root, actions[i]) for i in order]
        if depth == 1:
            open_ = [c for c in children if c.outcome is None]
            if open_:
                self._cut = True
            vals = dict(zip((c.key for c in open_), self._leaves.values(open_)))
        for i, child in zip(order, children):
            if depth == 1 and child.outcome is None:
                v = vals[child.key]
            else:
                v = self._search(child, depth - 1, alpha, beta, child_ctx)
            values[i] = v
            if _better(v, best, first):
                best, best_i = v, i
            if first:
                alpha = max(alpha, v)
            else:
                beta = min(beta, v)
        self._exact[root.key] = (root, best)
        self._order[root.key] = best_i
        return best_i, best, values, actions

    def run(self, root: GameState, budget: SearchBudget, ctx: MatchContext = MatchContext(),
            table: SearchTable | None = None, max_depth: int | None = None) -> SearchResult:
        if root.outcome is not None:
            raise ValueError("search root must be non-terminal")
        meter = self._meter = _Meter(budget)
        self._leaves = _Leaves(self.f_theta, meter)
        self._order: dict[int, int] = {}
        self._pv = None
        self._visits = 0
        done = None
        depth = 0
        while True:
            depth += 1
            self._exact = {}
            self._cut = False
            self._guard = done is not None  # depth 1 always completes
            try:
                best_i, value, values, actions = self._root(root, depth, ctx)
            except _OutOfBudget:
                break
            meter.iterations += 1
            done = (best_i, value, values, actions, self._exact, depth, self._cut)
            self._pv = best_i
            if self.trace is not None:
                self.trace({"depth": depth, "value": value, "best": self.game.action_to_str(actions[best_i]),
                            "visits": self._visits})
            if not self._cut or (max_depth is not None and depth >= max_depth):
                break
            if meter.exhausted():
                break
        best_i, value, values, actions, exact, depth, cut = done
        if table is not None:
            for key, (s, v) in exact.items():
                node = table.get(key)
                if node is None:
                    table.nodes[key] = Node(s, v, s.outcome or 0, s.outcome is not None, s.outcome is not None)
                else:
                    node.v = v
        return SearchResult(action=actions[best_i], value=value, actions=list(actions), child_values=values,
                            iterations=depth, nodes=meter.nodes, resolved=not cut,
                            touched=set(exact))


def alphabeta_id(game, root, f_theta, f_t, budget, ctx=MatchContext(), table=None, trace=None):
    return AlphaBeta(game, f_theta, f_t, trace=trace).run(root, budget, ctx, table)


def alphabeta_value(game, state, depth, f_theta, f_t, ctx=MatchContext()) -> float:
    """Value of a single fixed-depth alpha-beta search (no deepening)."""
    ab = AlphaBeta(game, f_theta, f_t)
    ab._meter = _Meter(SearchBudget.iterations(1))
    ab._leaves = _Leaves(f_theta, ab._meter)
    ab._order, ab._pv, ab._exact, ab._cut, ab._guard, ab._visits = {}, None, {}, False, False, 0
    if state.outcome is not None:
        return f_t(state, ctx)
    return ab._root(state, depth, ctx)[1]


# -- MCTS ----------------------------------------------------------------------------


class _MNode:
    __slots__ = ("state", "ctx", "actions", "children", "priors", "visits", "total", "value0")

    def __init__(self, state, ctx, value0):
        self.state = state
        self.ctx = ctx
        self.actions = None
        self.children = None
        self.priors = None
        self.visits = 0
        self.total = 0.0
        self.value0 = value0


class MCTS:
    """UCT without rollouts: a new leaf is valued by ``f_theta`` (terminals by ``f_t``).

    Each simulation adds one node. When a node gets its first child all its
    children are evaluated in one batch and the values are kept until the
    children are visited. Unvisited children are tried first, in canonical
    order; the final move is the most visited child.
    """

    def __init__(self, game: Game, f_theta, f_t, c: float = 0.4, trace=None):
        self.game = game
        self.f_theta = f_theta
        self.f_t = f_t
        self.c = c
        self.trace = trace

    def run(self, root: GameState, budget: SearchBudget, ctx: MatchContext = MatchContext()) -> SearchResult:
        if root.outcome is not None:
            raise ValueError("search root must be non-terminal")
        meter = _Meter(budget)
        leaves = _Leaves(self.f_theta, meter)
        rnode = _MNode(root, ctx, 0.0)
        kid_states = {}
        c = self.c
        while not meter.exhausted():
            node = rnode
            path = [node]
            while True:
                s = node.state
                if s.outcome is not None:
                    value = node.value0
                    break
                if node.actions is None:
                    kid_states[id(node)] = self._open_kids(node, leaves)
                kids, kctx = kid_states[id(node)]
                try:
                    i = node.children.index(None)
                except ValueError:
                    i = self._uct(node, c)
                    node = node.children[i]
                    path.append(node)
                    continue
                child = _MNode(kids[i], kctx, node.priors[i])
                node.children[i] = child
                path.append(child)
                value = child.value0
                break
            for n in path:
                n.visits += 1
                n.total += value
            meter.iterations += 1
            if self.trace is not None:
                self.trace({"depth": len(path) - 1, "value": value})
        if rnode.actions is None:
            kid_states[id(rnode)] = self._open_kids(rnode, leaves)
        counts = [ch.visits if ch is not None else 0 for ch in rnode.children]
        values = [ch.total / ch.visits if ch is not None and ch.visits else p
                  for ch, p in zip(rnode.children, rnode.priors)]
        first = root.to_move == FIRST
        best = 0
        for i in range(1, len(counts)):
            if counts[i] > counts[best] or (counts[i] == counts[best] and _better(values[i], values[best], first)):
                best = i
        value = rnode.total / rnode.visits if rnode.visits else values[best]
        return SearchResult(action=rnode.actions[best], value=value, actions=list(rnode.actions),
                            child_values=values, counts=counts, iterations=meter.iterations, nodes=meter.nodes,
                            pairs=self._tree_pairs(rnode))

    @staticmethod
    def _tree_pairs(rnode):
        # visited nodes with their mean value, for tree learning
        out, stack = [], [rnode]
        while stack:
            node = stack.pop()
            if node.visits:
                out.append((node.state, node.total / node.visits))
            if node.children:
                stack.extend(ch for ch in node.children if ch is not None)
        return out

    def _open_kids(self, node, leaves):
        game = self.game
        node.actions = game.legal_actions(node.state)
        kids = [game.apply(node.state, a) for a in node.actions]
        kctx = node.ctx.after_turn(node.state.to_move, len(node.actions))
        node.children = [None] * len(kids)
        priors = [0.0] * len(kids)
        for i, k in enumerate(kids):
            if k.outcome is not None:
                priors[i] = self.f_t(k, kctx)
        open_idx = [i for i, k in enumerate(kids) if k.outcome is None]
        for i, v in zip(open_idx, leaves.values([kids[i] for i in open_idx])):
            priors[i] = v
        node.priors = priors
        return kids, kctx

    @staticmethod
    def _uct(node, c):
        sign = 1.0 if node.state.to_move == FIRST else -1.0
        log_n = math.log(node.visits)
        best, best_score = 0, -INF
        for i, ch in enumerate(node.children):
            score = sign * ch.total / ch.visits + c * math.sqrt(log_n / ch.visits)
            if score > best_score:
                best, best_score = i, score
        return best


def mcts(game, root, f_theta, f_t, budget, ctx=MatchContext(), c=0.4, trace=None):
    return MCTS(game, f_theta, f_t, c=c, trace=trace).run(root, budget, ctx)


# -- dispatch and oracle ---------------------------------------------------------------

ALGORITHMS = ("ubfm", "descent", "completed_descent", "ubfm_s", "alphabeta", "mcts")


class Searcher:
    """Uniform front end: ``searcher(state, table, ctx) -> SearchResult``.

    ``completion`` applies to ubfm and descent (completed_descent and ubfm_s
    always complete).
    """

    def __init__(self, algorithm: str, game: Game, f_theta, f_t, budget: SearchBudget,
                 completion: bool = False, uct_c: float = 0.4, trace=None):
        if algorithm not in ALGORITHMS:
            raise ValueError(f"unknown search algorithm {algorithm!r}; choose from {ALGORITHMS}")
        self.algorithm = algorithm
        self.game = game
        self.f_t = f_t
        self.budget = budget
        if algorithm in ("ubfm", "descent", "completed_descent", "ubfm_s"):
            self.completion = completion or algorithm in ("completed_descent", "ubfm_s")
            self.engine = BestFirst(game, f_theta, f_t, descent=algorithm in ("descent", "completed_descent"),
                                    completion=self.completion, count=algorithm == "ubfm_s", trace=trace)
        elif algorithm == "alphabeta":
            self.completion = False
            self.engine = AlphaBeta(game, f_theta, f_t, trace=trace)
        else:
            self.completion = False
            self.engine = MCTS(game, f_theta, f_t, c=uct_c, trace=trace)

    @property
    def uses_table(self) -> bool:
        return self.algorithm != "mcts"

    def __call__(self, state: GameState, table: SearchTable, ctx: MatchContext = MatchContext()) -> SearchResult:
        if isinstance(self.engine, BestFirst):
            return self.engine.run(state, table, self.budget, ctx)
        if isinstance(self.engine, AlphaBeta):
            return self.engine.run(state, self.budget, ctx, table)
        return self.engine.run(state, self.budget, ctx)


def solve(game: Game, state: GameState, memo: dict | None = None) -> int:
    """Game-theoretic gain of ``state`` by exhaustive memoized minimax (small games only)."""
    memo = {} if memo is None else memo

    def rec(s):
        if s.outcome is not None:
            return s.outcome
        hit = memo.get(s.key)
        if hit is not None:
            return hit
        first = s.to_move == FIRST
        target = 1 if first else -1
        best = -2 if first else 2
        for a in game.legal_actions(s):
            v = rec(game.apply(s, a))
            if _better(v, best, first):
                best = v
                if v == target:
                    break
        memo[s.key] = best
        return best

    return rec(state)
