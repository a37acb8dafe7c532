"""Table space: subgoal trie, per-subgoal solution tries, subgoal frames.

Both tries share one node type.  A node is terminal when it carries a
payload (subgoal trie: the frame) or an insertion ordinal (solution trie).
Canonical token streams are preorder walks, so no terminal is a proper
ancestor of another terminal; solution terminals are always leaves.

Nodes keep a parent pointer instead of storing the inserted term, which
matters at the scale of millions of stored solutions: a solution is
rebuilt on demand by walking terminal-to-root.
"""

from __future__ import annotations

from typing import Iterator, Optional

from .terms import Functor, term_to_str, term_tokens, tokens_to_term

READY = "ready"
EVALUATING = "evaluating"
COMPLETE = "complete"
LOOP_READY = "loop_ready"
LOOP_EVALUATING = "loop_evaluating"

_ALLOWED_TRANSITIONS = frozenset(
    [
        (READY, EVALUATING),
        (EVALUATING, COMPLETE),
        (EVALUATING, LOOP_READY),
        (LOOP_READY, LOOP_EVALUATING),
        (LOOP_EVALUATING, COMPLETE),
        (LOOP_EVALUATING, LOOP_READY),
    ]
)


class TablingInvariantError(RuntimeError):
    """A table-space or engine invariant was violated; always a bug."""


class TrieNode:
    __slots__ = ("token", "children", "parent", "ordinal", "looping", "payload")

    def __init__(self, token, parent):
        self.token = token
        self.children: Optional[dict] = None
        self.parent = parent
        self.ordinal: Optional[int] = None
        self.looping = False
        self.payload = None

    def child(self, token) -> "TrieNode":
        ch = self.children
        if ch is None:
            ch = self.children = {}
            node = None
        else:
            node = ch.get(token)
        if node is None:
            node = TrieNode(token, self)
            ch[token] = node
        return node


def terminal_tokens(node: TrieNode) -> tuple:
    toks = []
    while node.parent is not None:
        toks.append(node.token)
        node = node.parent
    toks.reverse()
    return tuple(toks)


def solution_term(node: TrieNode):
    return tokens_to_term(terminal_tokens(node))


class SubgoalFrame:
    __slots__ = (
        "fid",
        "functor",
        "call_tokens",
        "state",
        "solution_trie_root",
        "sol_func_node",
        "solution_order",
        "is_leader",
        "new_solutions",
        "looping_alternatives",
        "first_solution_in_current_round",
        "next_alternative",
        "alt_seq",
        "pioneer_active",
        "stack_depth",
        "push_stamp",
        "flat_pairs",
    )

    def __init__(self, functor: Functor, call_tokens: tuple, fid: int = 0):
        self.fid = fid
        self.functor = functor
        self.call_tokens = call_tokens
        self.state = READY
        self.solution_trie_root = TrieNode(None, None)
        # every solution starts with the functor token; pre-create that level
        self.sol_func_node = self.solution_trie_root.child(functor)
        self.solution_order: list[TrieNode] = []
        self.is_leader = True
        self.new_solutions = False
        self.looping_alternatives: dict[int, None] = {}  # ordered set
        self.first_solution_in_current_round: Optional[int] = None  # ordinal
        self.next_alternative = 0  # cursor into alt_seq, shared with followers
        self.alt_seq: tuple = ()  # clause indices the current round runs
        self.pioneer_active = False
        self.stack_depth: Optional[int] = None
        self.push_stamp = 0
        # true while every stored solution is f(atomic, atomic); lets bulk
        # readers skip per-node shape checks
        self.flat_pairs = True

    def set_state(self, new: str) -> None:
        if (self.state, new) not in _ALLOWED_TRANSITIONS:
            raise TablingInvariantError(
                f"illegal state transition {self.state} -> {new} for {self.subgoal_str()}"
            )
        self.state = new

    def subgoal_str(self) -> str:
        return term_to_str(tokens_to_term(self.call_tokens))

    def __repr__(self) -> str:
        return f"<frame {self.subgoal_str()} {self.state}>"


class TableSpace:
    """One evaluation session's tables; fresh per top-level query."""

    def __init__(self) -> None:
        self.subgoal_root = TrieNode(None, None)
        self.frames: list[SubgoalFrame] = []

    def subgoal_check_insert(self, call) -> tuple[SubgoalFrame, bool]:
        tokens = term_tokens(call)
        node = self.subgoal_root
        for tok in tokens:
            node = node.child(tok)
        frame = node.payload
        if frame is not None:
            return frame, True
        f = tokens[0]
        if type(f) is not Functor:
            raise TablingInvariantError("tabled call must be atom or compound")
        frame = SubgoalFrame(f, tokens, len(self.frames))
        node.payload = frame
        self.frames.append(frame)
        return frame, False

    def solution_check_insert(self, sol, frame: SubgoalFrame) -> bool:
        if frame.state == COMPLETE:
            raise TablingInvariantError("insert into complete table")
        tokens = term_tokens(sol)
        if len(tokens) != 3 or type(tokens[1]) is tuple or type(tokens[2]) is tuple:
            frame.flat_pairs = False
        node = frame.solution_trie_root
        for tok in tokens:
            node = node.child(tok)
        if node.ordinal is not None:
            return False
        node.ordinal = len(frame.solution_order)
        frame.solution_order.append(node)
        return True

    def load_solutions(self, frame: SubgoalFrame, mode: str) -> Iterator[TrieNode]:
        if mode == "all":
            return iter(frame.solution_order)
        if mode != "looping_plus_current_round":
            raise ValueError(f"unknown load mode {mode!r}")
        return self._looping_plus_round(frame)

    @staticmethod
    def _looping_plus_round(frame: SubgoalFrame) -> Iterator[TrieNode]:
        fir = frame.first_solution_in_current_round
        for i, node in enumerate(frame.solution_order):
            if node.looping or (fir is not None and i >= fir):
                yield node

    @staticmethod
    def mark_looping_alternative(frame: SubgoalFrame, clause_index: int) -> None:
        frame.looping_alternatives.setdefault(clause_index)

    @staticmethod
    def mark_looping_solution(frame: SubgoalFrame, node: TrieNode) -> None:
        if node.ordinal is None:
            raise TablingInvariantError("looping mark on a non-solution node")
        node.looping = True

    @staticmethod
    def begin_round(frame: SubgoalFrame) -> None:
        frame.first_solution_in_current_round = None

    def completed_iterator(self, frame: SubgoalFrame) -> Iterator[TrieNode]:
        if frame.state != COMPLETE:
            raise TablingInvariantError("completed_iterator on incomplete frame")
        return iter(frame.solution_order)

    def dump(self) -> str:
        """Deterministic text rendering, one frame per block."""
        out = []
        for fr in self.frames:
            leader = "yes" if fr.is_leader else "no"
            out.append(f"== {fr.subgoal_str()} state={fr.state} leader={leader}")
            if fr.looping_alternatives:
                idxs = ",".join(str(i) for i in fr.looping_alternatives)
                out.append(f"   looping_alts: [{idxs}]")
            for i, node in enumerate(fr.solution_order):
                mark = " *loop" if node.looping else ""
                out.append(f"   sol {i}: {term_to_str(solution_term(node))}{mark}")
        return "\n".join(out) + ("\n" if out else "")
