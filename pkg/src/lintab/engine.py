"""Linear-tabling resolution engine.

One execution tree, explicit choice-point stack, local scheduling: a new
solution always fails back, and a generator hands solutions to its caller
only once its clause cursor is exhausted (non-leaders) or its strongly
connected component completes (leaders).

Leadership and loop marking are tracked lazily.  Every repeated call
records a dependency event (stamp, target depth).  A generator is a
leader at its fix-point check iff no event since its push targets a
frame below it; a clause alternative (or a solution being propagated)
is loop-marked iff some event during its activity window targets a
frame at or below the owner.  Both queries are O(log n) on a monotone
event stack, which keeps the per-event cost constant instead of walking
the generator stack on every repeated call.

Three optimizations combine freely:

* dre: a repeated call steals the next untried clause of the evaluating
  call through the frame's shared cursor, then consumes.
* dra: re-evaluation rounds run only loop-marked alternatives.
* drs: non-leader generators propagate only loop-marked solutions plus
  the ones new in the current round.
"""

from __future__ import annotations

import logging
from bisect import bisect_left
from dataclasses import dataclass, field

from .reader import Program
from .tablespace import (
    COMPLETE,
    EVALUATING,
    LOOP_EVALUATING,
    LOOP_READY,
    READY,
    TableSpace,
    TablingInvariantError,
    TrieNode,
    solution_term,
)
from .terms import Functor, Struct, Var, deref, fresh_copy, functor, unify, Trail

log = logging.getLogger("lintab.engine")

DEFAULT_STEP_BUDGET = 10**9


class StepBudgetExceeded(RuntimeError):
    """The evaluation passed its resolution-step budget without finishing."""


@dataclass(frozen=True)
class StrategyConfig:
    dre: bool = False
    dra: bool = False
    drs: bool = False

    @property
    def label(self) -> str:
        parts = [n for n, on in (("dre", self.dre), ("dra", self.dra), ("drs", self.drs)) if on]
        return "+".join(parts) if parts else "standard"


ALL_CONFIGS = tuple(
    StrategyConfig(dre=e, dra=a, drs=s)
    for e in (False, True)
    for a in (False, True)
    for s in (False, True)
)


@dataclass
class EvalStats:
    alts_explored: int = 0
    nonleader_sols_consumed: int = 0
    sld_calls: dict[str, int] = field(default_factory=dict)
    rounds_started: int = 0
    followers_created: int = 0
    answers_emitted: int = 0

    def as_dict(self) -> dict:
        return {
            "alts_explored": self.alts_explored,
            "nonleader_sols_consumed": self.nonleader_sols_consumed,
            "sld_calls": dict(self.sld_calls),
            "rounds_started": self.rounds_started,
            "followers_created": self.followers_created,
            "answers_emitted": self.answers_emitted,
        }


# continuation markers -------------------------------------------------


class _NewSol:
    __slots__ = ("frame", "sol")

    def __init__(self, frame, sol):
        self.frame = frame
        self.sol = sol


class _Collect:
    __slots__ = ()


_COLLECT = _Collect()

# predicate call shapes
_P_TABLED = 0
_P_GENERAL = 1
_P_FACTS2 = 2  # all clauses ground facts of arity 2, first-arg indexed
_P_FACT0 = 3  # single 0-ary fact: deterministic success
_P_EMPTY = 4


class _Pred:
    __slots__ = ("functor", "key", "kind", "clauses", "all_alts", "index", "facts")

    def __init__(self, f: Functor, clauses, tabled: bool):
        self.functor = f
        self.key = f"{f.name}/{f.arity}"
        self.clauses = [(c.head, c.body) for c in clauses]
        self.all_alts = tuple(range(len(clauses)))
        self.index = None
        self.facts = None
        if tabled:
            self.kind = _P_TABLED
        elif not clauses:
            self.kind = _P_EMPTY
        elif (
            len(clauses) == 1
            and f.arity == 0
            and not clauses[0].body
        ):
            self.kind = _P_FACT0
        elif f.arity == 2 and all(
            not c.body and _ground_atomic(c.head.args[0]) and _ground_atomic(c.head.args[1])
            for c in clauses
        ):
            self.kind = _P_FACTS2
            self.facts = [(c.head.args[0], c.head.args[1]) for c in clauses]
            self.index = {}
            for a0, a1 in self.facts:
                self.index.setdefault(a0, []).append(a1)
        else:
            self.kind = _P_GENERAL


def _ground_atomic(t) -> bool:
    return type(t) is int or type(t) is Functor


# choice points ---------------------------------------------------------

K_INTERIOR = 0
K_FACTS = 1
K_GENERATOR = 2
K_CONSUMER = 3
K_FOLLOWER = 4

PH_CLAUSES = 0
PH_CONSUME = 1  # non-leader propagation to the caller
PH_DELIVER = 2  # completed-table streaming to the caller

# delivery plans
PLAN_GENERAL = 0
PLAN_TABLE = 1  # fused: insert last-arg token into the parent's table
PLAN_COLLECT = 2  # fused: append terminals to the raw answer list


class _CP:
    __slots__ = (
        "kind",
        "mark",
        "cont",
        "frame",
        "call",
        "phase",
        "idx",
        "plan",
        "ns_cell",
        "alt_open",
        "cur_clause",
        "sol_open",
        "cur_sol",
        "clauses",
        "facts",
        "c0",
        "c1",
        "via",
        "restricted",
        "count_sols",
    )

    def __init__(self, kind, mark, cont):
        self.kind = kind
        self.mark = mark
        self.cont = cont
        self.frame = None
        self.call = None
        self.phase = PH_CLAUSES
        self.idx = 0
        self.plan = None
        self.ns_cell = None
        self.alt_open = None
        self.cur_clause = -1
        self.sol_open = None
        self.cur_sol = None
        self.clauses = None
        self.facts = None
        self.c0 = None
        self.c1 = None
        self.via = ""
        self.restricted = False
        self.count_sols = False


class Engine:
    """One evaluation thread over one program.  Share-nothing."""

    def __init__(
        self,
        program: Program,
        config: StrategyConfig | None = None,
        *,
        step_budget: int = DEFAULT_STEP_BUDGET,
        trace: bool = False,
        validate: bool = False,
    ):
        self.config = config or StrategyConfig()
        self.step_budget = step_budget
        self.events: list[str] | None = [] if trace else None
        self.validate = validate
        # tracing and validation observe per-delivery state, so the fused
        # bulk paths must stay off for them
        self.fuse_ok = not (trace or validate)
        self.preds: dict[Functor, _Pred] = {}
        for f, clauses in program.predicates.items():
            self.preds[f] = _Pred(f, clauses, f in program.tabled)
        for f in program.tabled:
            if f not in self.preds:
                self.preds[f] = _Pred(f, [], True)
        self._warned: set[Functor] = set()
        # per-run state, reset in run_query
        self.ts = TableSpace()
        self.stats = EvalStats()
        self.trail = Trail()
        self.cps: list[_CP] = []
        self.gen_stack = []
        self.ev_stamps: list[int] = []
        self.ev_depths: list[int] = []
        self.clock = 0
        self.steps = 0
        self.raw_answers: list = []
        self._collect_cell = None
        self._single_goal = None
        self._template = None
        self._roles: dict = {}

    # -- dependency events ----------------------------------------------

    def _record_event(self, depth: int) -> None:
        # monotone stack: keep depths strictly increasing so the suffix
        # minimum from any stamp is just the first entry at/after it
        st, dp = self.ev_stamps, self.ev_depths
        while dp and dp[-1] >= depth:
            dp.pop()
            st.pop()
        st.append(self.clock)
        dp.append(depth)
        self.clock += 1

    def _min_event_depth_since(self, stamp: int) -> int | None:
        i = bisect_left(self.ev_stamps, stamp)
        if i == len(self.ev_stamps):
            return None
        return self.ev_depths[i]

    def _frame_is_leader(self, frame) -> bool:
        d = self._min_event_depth_since(frame.push_stamp)
        return d is None or d >= frame.stack_depth

    def materialize_leader_flags(self) -> None:
        """Refresh is_leader on every live generator from the event log."""
        for f in self.gen_stack:
            f.is_leader = self._frame_is_leader(f)

    # -- public API -------------------------------------------------------

    def run_query(self, goals: list) -> tuple[list, EvalStats]:
        """Evaluate a goal conjunction.  Returns raw answers (terms, or
        solution-trie terminals when the bulk path ran) and the stats."""
        self.ts = TableSpace()
        self.stats = EvalStats()
        self.trail = Trail()
        self.cps = []
        self.gen_stack = []
        self.ev_stamps = []
        self.ev_depths = []
        self.clock = 0
        self.steps = 0
        self.raw_answers = []
        self._roles = {}
        if not goals:
            raise ValueError("empty query")
        template = goals[0] if len(goals) == 1 else Struct(functor(",", len(goals)), tuple(goals))
        self._single_goal = goals[0] if len(goals) == 1 else None
        self._collect_cell = (_COLLECT, None)
        cont = self._collect_cell
        for g in reversed(goals):
            cont = (g, cont)
        self._template = template
        self._run(cont)
        self._check_exit_invariants()
        return self.raw_answers, self.stats

    def answers(self, raw) -> list:
        out = []
        for a in raw:
            out.append(solution_term(a) if type(a) is TrieNode else a)
        return out

    def _check_exit_invariants(self) -> None:
        if self.gen_stack:
            raise TablingInvariantError("generator stack not empty at exit")
        for f in self.ts.frames:
            if f.state != COMPLETE:
                raise TablingInvariantError(f"frame {f.subgoal_str()} not complete at exit")

    # -- events -----------------------------------------------------------

    def _ev(self, msg: str) -> None:
        self.events.append(msg)

    # -- the machine ------------------------------------------------------

    def _run(self, cont) -> None:
        trail = self.trail
        cps = self.cps
        preds = self.preds
        stats = self.stats
        trace = self.events is not None
        dre = self.config.dre
        budget = self.step_budget

        while True:
            # PROCEED: run the continuation until something fails
            while cont is not None:
                entry, rest = cont
                te = type(entry)
                if te is Struct or te is Functor:
                    f = entry if te is Functor else entry.functor
                    pred = preds.get(f)
                    if pred is None:
                        if f not in self._warned:
                            self._warned.add(f)
                            log.warning("unknown predicate %s/%d fails", f.name, f.arity)
                        cont = None
                        break
                    kind = pred.kind
                    self.steps += 1
                    if self.steps >= budget:
                        raise StepBudgetExceeded(
                            f"step budget of {budget} exceeded"
                        )
                    if kind == _P_FACT0:
                        sc = stats.sld_calls
                        sc[pred.key] = sc.get(pred.key, 0) + 1
                        cont = rest
                        continue
                    if kind == _P_TABLED:
                        cont = self._tabled_call(entry, rest)
                        continue
                    sc = stats.sld_calls
                    sc[pred.key] = sc.get(pred.key, 0) + 1
                    if kind == _P_FACTS2:
                        a0 = deref(entry.args[0])
                        a1 = deref(entry.args[1])
                        if type(a0) is Var:
                            facts = pred.facts
                        else:
                            vals = pred.index.get(a0)
                            if vals is None:
                                cont = None
                                break
                            facts = vals  # list of second args only
                        cp = _CP(K_FACTS, len(trail), rest)
                        cp.facts = facts
                        cp.c0 = a0
                        cp.c1 = a1
                        cps.append(cp)
                        cont = None
                        break
                    if kind == _P_EMPTY:
                        cont = None
                        break
                    cp = _CP(K_INTERIOR, len(trail), rest)
                    cp.call = entry
                    cp.clauses = pred.clauses
                    cps.append(cp)
                    cont = None
                    break
                if te is _NewSol:
                    self._new_solution(entry)
                    cont = None
                    break
                if te is _Collect:
                    self.raw_answers.append(fresh_copy(self._template))
                    cont = None
                    break
                raise TablingInvariantError(f"bad continuation entry {entry!r}")

            # FAIL: retry the youngest choice point
            while cont is None:
                if not cps:
                    return
                cp = cps[-1]
                k = cp.kind
                if k == K_FACTS:
                    cont = self._retry_facts(cp)
                elif k == K_INTERIOR:
                    cont = self._retry_interior(cp)
                elif k == K_CONSUMER:
                    cont = self._deliver(cp)
                elif k == K_GENERATOR:
                    cont = self._retry_generator(cp)
                else:
                    cont = self._retry_follower(cp)

    # -- non-tabled calls --------------------------------------------------

    def _retry_facts(self, cp):
        trail = self.trail
        trail.undo_to(cp.mark)
        facts = cp.facts
        i = cp.idx
        n = len(facts)
        c0 = cp.c0
        c1 = cp.c1
        self.steps += 1
        if type(c0) is Var:
            while i < n:
                f0, f1 = facts[i]
                i += 1
                c0.ref = f0
                trail.append(c0)
                x = deref(c1)
                if type(x) is Var:
                    x.ref = f1
                    trail.append(x)
                    cp.idx = i
                    return cp.cont
                if x is f1 or x == f1:
                    cp.idx = i
                    return cp.cont
                trail.undo_to(cp.mark)
        else:
            # facts is the list of second args for the bound first arg
            while i < n:
                f1 = facts[i]
                i += 1
                x = deref(c1)
                if type(x) is Var:
                    x.ref = f1
                    trail.append(x)
                    cp.idx = i
                    return cp.cont
                if x is f1 or x == f1:
                    cp.idx = i
                    return cp.cont
                trail.undo_to(cp.mark)
        self.cps.pop()
        return None

    def _retry_interior(self, cp):
        trail = self.trail
        clauses = cp.clauses
        n = len(clauses)
        goal = cp.call
        while cp.idx < n:
            trail.undo_to(cp.mark)
            head, body = clauses[cp.idx]
            cp.idx += 1
            self.steps += 1
            mapping = {}
            if not unify(goal, fresh_copy(head, mapping), trail):
                continue
            cont = cp.cont
            for g in reversed(body):
                cont = (fresh_copy(g, mapping), cont)
            return cont
        trail.undo_to(cp.mark)
        self.cps.pop()
        return None

    # -- tabled calls --------------------------------------------------------

    def _tabled_call(self, goal, rest):
        ts = self.ts
        frame, _existed = ts.subgoal_check_insert(goal)
        state = frame.state
        trace = self.events is not None

        if state == READY:
            frame.set_state(EVALUATING)
            self._install_generator(frame, goal, rest, first_round=True)
            if trace:
                self._ev(f"call g{frame.fid} generator")
            return None

        if state == COMPLETE:
            cp = _CP(K_CONSUMER, len(self.trail), rest)
            cp.frame = frame
            cp.call = goal
            cp.via = "completed"
            cp.plan = self._make_plan(frame, goal, rest)
            self.cps.append(cp)
            if trace:
                self._ev(f"call g{frame.fid} completed")
            return None

        if state == LOOP_READY:
            frame.set_state(LOOP_EVALUATING)
            self._install_generator(frame, goal, rest, first_round=False)
            if trace:
                self._ev(f"call g{frame.fid} generator")
            return None

        # evaluating / loop_evaluating: a repeated call
        self._record_event(frame.stack_depth)
        cfg = self.config
        if (
            cfg.dre
            and frame.pioneer_active
            and frame.next_alternative < len(frame.alt_seq)
        ):
            self.stats.followers_created += 1
            cp = _CP(K_FOLLOWER, len(self.trail), rest)
            cp.frame = frame
            cp.call = goal
            cp.ns_cell = (_NewSol(frame, goal), None)
            self.cps.append(cp)
            if trace:
                self._ev(f"call g{frame.fid} follower")
            return None
        cp = _CP(K_CONSUMER, len(self.trail), rest)
        cp.frame = frame
        cp.call = goal
        cp.via = "consumer"
        cp.plan = self._make_plan(frame, goal, rest)
        self.cps.append(cp)
        if trace:
            self._ev(f"call g{frame.fid} consumer")
        return None

    def _install_generator(self, frame, goal, rest, first_round: bool):
        pred = self.preds[frame.functor]
        gs = self.gen_stack
        frame.stack_depth = len(gs)
        gs.append(frame)
        frame.push_stamp = self.clock
        frame.pioneer_active = True
        if first_round:
            frame.alt_seq = pred.all_alts
        else:
            self.ts.begin_round(frame)
            frame.alt_seq = (
                tuple(frame.looping_alternatives) if self.config.dra else pred.all_alts
            )
        frame.next_alternative = 0
        if self.validate:
            self._roles[frame.fid] = {}
        cp = _CP(K_GENERATOR, len(self.trail), rest)
        cp.frame = frame
        cp.call = goal
        cp.ns_cell = (_NewSol(frame, goal), None)
        self.cps.append(cp)

    def _new_solution(self, entry) -> None:
        frame = entry.frame
        stats = self.stats
        is_new = self.ts.solution_check_insert(entry.sol, frame)
        self.steps += 1
        if is_new:
            stats.answers_emitted += 1
            frame.new_solutions = True
            if self.config.drs and frame.first_solution_in_current_round is None:
                frame.first_solution_in_current_round = len(frame.solution_order) - 1
            if self.events is not None:
                self._ev(f"new_solution g{frame.fid} {len(frame.solution_order) - 1}")
        elif self.events is not None:
            self._ev(f"new_solution g{frame.fid} dup")

    # -- generator: alternatives, fix-point, restart, completion ------------

    def _close_alt_window(self, cp, frame) -> None:
        if cp.alt_open is not None:
            if self.config.dra:
                d = self._min_event_depth_since(cp.alt_open)
                if d is not None and d <= frame.stack_depth:
                    TableSpace.mark_looping_alternative(frame, cp.cur_clause)
            cp.alt_open = None

    def _retry_generator(self, cp):
        frame = cp.frame
        trail = self.trail
        stats = self.stats
        trace = self.events is not None

        if cp.phase != PH_CLAUSES:
            return self._deliver(cp)

        self._close_alt_window(cp, frame)
        pred = self.preds[frame.functor]
        while True:
            seq = frame.alt_seq
            i = frame.next_alternative
            if i < len(seq):
                frame.next_alternative = i + 1
                ci = seq[i]
                trail.undo_to(cp.mark)
                head, body = pred.clauses[ci]
                mapping = {}
                if not unify(cp.call, fresh_copy(head, mapping), trail):
                    continue
                stats.alts_explored += 1
                self.steps += 1
                if self.validate:
                    self._note_role(frame, ci, "pioneer")
                    if self.config.dra and frame.state == LOOP_EVALUATING:
                        if ci not in frame.looping_alternatives:
                            raise TablingInvariantError(
                                f"loop round ran non-looping clause {ci}"
                            )
                if trace:
                    self._ev(f"alt g{frame.fid} {ci}")
                cp.cur_clause = ci
                if self.config.dra:
                    cp.alt_open = self.clock
                cont = cp.ns_cell
                for g in reversed(body):
                    cont = (fresh_copy(g, mapping), cont)
                return cont

            # cursor exhausted: fix-point check
            trail.undo_to(cp.mark)
            md = self._min_event_depth_since(frame.push_stamp)
            if md is None or md >= frame.stack_depth:
                frame.is_leader = True
                # md == depth means a repeated call targeted this frame:
                # the subgoal depends on itself, so a round that grew any
                # table in the component forces another pass.  Without a
                # self-dependency the first pass is already final.
                if md == frame.stack_depth and (
                    frame.new_solutions
                    or any(
                        m.new_solutions
                        for m in self.gen_stack[frame.stack_depth + 1 :]
                    )
                ):
                    self._restart_round(cp, frame)
                    continue
                self._complete_scc(cp, frame)
                return self._deliver(cp)
            frame.is_leader = False
            if trace:
                self._ev(f"fixpoint g{frame.fid} propagate")
            cp.phase = PH_CONSUME
            cp.idx = 0
            cp.via = "generator"
            cp.count_sols = True
            cp.restricted = self.config.drs
            cp.plan = self._make_plan(frame, cp.call, cp.cont)
            return self._deliver(cp)

    def _restart_round(self, cp, frame) -> None:
        stats = self.stats
        stats.rounds_started += 1
        if self.events is not None:
            self._ev(f"round_start g{frame.fid} {stats.rounds_started}")
            self._ev(f"fixpoint g{frame.fid} restart")
        frame.new_solutions = False
        gs = self.gen_stack
        d = frame.stack_depth
        for m in gs[d + 1 :]:
            m.set_state(LOOP_READY)
            m.pioneer_active = False
            m.stack_depth = None
            m.new_solutions = False
        del gs[d + 1 :]
        frame.set_state(LOOP_READY)
        frame.set_state(LOOP_EVALUATING)
        frame.push_stamp = self.clock
        self.ts.begin_round(frame)
        frame.alt_seq = (
            tuple(frame.looping_alternatives)
            if self.config.dra
            else self.preds[frame.functor].all_alts
        )
        frame.next_alternative = 0
        if self.validate:
            self._roles[frame.fid] = {}

    def _complete_scc(self, cp, frame) -> None:
        trace = self.events is not None
        gs = self.gen_stack
        d = frame.stack_depth
        for m in gs[d + 1 :]:
            if self.validate and m.new_solutions:
                raise TablingInvariantError("completing member with pending solutions")
            m.set_state(COMPLETE)
            m.pioneer_active = False
            m.stack_depth = None
            if trace:
                self._ev(f"complete g{m.fid}")
        frame.set_state(COMPLETE)
        frame.pioneer_active = False
        frame.stack_depth = None
        del gs[d:]
        if trace:
            self._ev(f"fixpoint g{frame.fid} complete")
            self._ev(f"complete g{frame.fid}")
        cp.phase = PH_DELIVER
        cp.idx = 0
        cp.via = "completed"
        cp.count_sols = False
        cp.restricted = False
        cp.plan = self._make_plan(frame, cp.call, cp.cont)

    def _note_role(self, frame, clause, role) -> None:
        m = self._roles.setdefault(frame.fid, {})
        prev = m.get(clause)
        if prev is not None and prev != role:
            raise TablingInvariantError(
                f"clause {clause} run by both pioneer and follower"
            )
        m[clause] = role

    # -- followers -----------------------------------------------------------

    def _retry_follower(self, cp):
        frame = cp.frame
        trail = self.trail
        if cp.phase == PH_CLAUSES:
            # the stolen clause participates in the loop like any other
            # evaluated alternative: mark it if a repeated call targeted
            # at-or-below the owner while it ran
            self._close_alt_window(cp, frame)
            pred = self.preds[frame.functor]
            while True:
                seq = frame.alt_seq
                i = frame.next_alternative
                if i >= len(seq) or not frame.pioneer_active:
                    break
                frame.next_alternative = i + 1
                ci = seq[i]
                trail.undo_to(cp.mark)
                head, body = pred.clauses[ci]
                mapping = {}
                if not unify(cp.call, fresh_copy(head, mapping), trail):
                    continue
                self.stats.alts_explored += 1
                self.steps += 1
                if self.validate:
                    self._note_role(frame, ci, "follower")
                if self.events is not None:
                    self._ev(f"alt g{frame.fid} {ci}")
                cp.cur_clause = ci
                if self.config.dra:
                    cp.alt_open = self.clock
                cont = cp.ns_cell
                for g in reversed(body):
                    cont = (fresh_copy(g, mapping), cont)
                return cont
            trail.undo_to(cp.mark)
            cp.phase = PH_CONSUME
            cp.idx = 0
            cp.via = "follower"
            cp.count_sols = False
            cp.restricted = False  # followers always consume everything
            cp.plan = self._make_plan(frame, cp.call, cp.cont)
        return self._deliver(cp)

    # -- deliveries ------------------------------------------------------------

    def _make_plan(self, src_frame, call, cont):
        """Classify the delivery continuation; fused plans run without
        per-solution trail traffic."""
        if not self.fuse_ok:
            return (PLAN_GENERAL,)
        if cont is self._collect_cell and self._single_goal is not None:
            # the query-level choice point streaming into the answer list
            return (PLAN_COLLECT,)
        if type(call) is not Struct or len(call.args) != 2:
            return (PLAN_GENERAL,)
        if not _ground_atomic(deref(call.args[0])):
            return (PLAN_GENERAL,)
        cv = deref(call.args[1])
        if type(cv) is not Var:
            return (PLAN_GENERAL,)
        bumps = []
        c = cont
        while c is not None:
            entry = c[0]
            te = type(entry)
            if te is Functor:
                p = self.preds.get(entry)
                if p is not None and p.kind == _P_FACT0:
                    bumps.append(p.key)
                    c = c[1]
                    continue
                return (PLAN_GENERAL,)
            if te is _NewSol:
                # whatever follows the insert never runs: a new solution
                # always fails back under local scheduling
                sol = entry.sol
                if type(sol) is not Struct or len(sol.args) != 2:
                    return (PLAN_GENERAL,)
                a0 = deref(sol.args[0])
                if not _ground_atomic(a0) or deref(sol.args[1]) is not cv:
                    return (PLAN_GENERAL,)
                parent = entry.frame
                xnode = parent.sol_func_node.child(a0)
                return (PLAN_TABLE, parent, xnode, tuple(bumps))
            if te is _Collect:
                if self._single_goal is not None and not bumps:
                    return (PLAN_COLLECT,)
                return (PLAN_GENERAL,)
            return (PLAN_GENERAL,)
        return (PLAN_GENERAL,)

    def _deliver(self, cp):
        tag = cp.plan[0]
        run_general = tag == PLAN_GENERAL
        if tag == PLAN_TABLE:
            # False means the burst hit a non-atomic answer and switched
            # the plan; the rest of the list goes through the general path
            run_general = not self._burst_table(cp, cp.plan)
        elif tag == PLAN_COLLECT:
            self._burst_collect(cp)
        if run_general:
            cont = self._deliver_general(cp)
            if cont is not None:
                return cont
        # exhausted: a non-leader generator popping here leaves its frame
        # on the generator stack until the leader restarts or completes
        self.trail.undo_to(cp.mark)
        self.cps.pop()
        return None

    def _burst_table(self, cp, plan) -> bool:
        _, parent, xnode, bumps = plan
        src = cp.frame
        sols = src.solution_order
        sfn = src.sol_func_node
        porder = parent.solution_order
        pch = xnode.children
        if pch is None:
            pch = xnode.children = {}
        drs = self.config.drs
        restricted = cp.restricted
        i = cp.idx
        start = i
        new_cnt = 0
        filtered_skips = 0
        bail = False
        pget = pch.get
        if src.flat_pairs and not restricted:
            # hot path: every solution is f(atomic, atomic), nothing filtered
            while i < len(sols):
                z = sols[i].token
                i += 1
                if pget(z) is None:
                    nn = TrieNode(z, xnode)
                    nn.ordinal = len(porder)
                    porder.append(nn)
                    pch[z] = nn
                    new_cnt += 1
                    if drs and parent.first_solution_in_current_round is None:
                        parent.first_solution_in_current_round = nn.ordinal
        else:
            # live length: when parent is src, inserts extend the list we read
            while i < len(sols):
                node = sols[i]
                i += 1
                if restricted:
                    fir = src.first_solution_in_current_round
                    if not (
                        node.looping or (fir is not None and node.ordinal >= fir)
                    ):
                        filtered_skips += 1
                        continue
                z = node.token
                if type(z) is tuple or node.parent.parent is not sfn:
                    # var or compound argument: finish on the general path
                    i -= 1
                    bail = True
                    break
                ex = pget(z)
                if ex is None:
                    nn = TrieNode(z, xnode)
                    nn.ordinal = len(porder)
                    porder.append(nn)
                    pch[z] = nn
                    new_cnt += 1
                    if drs and parent.first_solution_in_current_round is None:
                        parent.first_solution_in_current_round = nn.ordinal
        delivered = (i - start) - filtered_skips
        cp.idx = i
        if new_cnt:
            parent.new_solutions = True
            self.stats.answers_emitted += new_cnt
        if delivered:
            self.steps += delivered
            if cp.count_sols:
                self.stats.nonleader_sols_consumed += delivered
            if bumps:
                sc = self.stats.sld_calls
                for key in bumps:
                    sc[key] = sc.get(key, 0) + delivered
        if bail:
            cp.plan = (PLAN_GENERAL,)
        return not bail

    def _burst_collect(self, cp) -> bool:
        src = cp.frame
        sols = src.solution_order
        i = cp.idx
        if cp.restricted:
            fir = src.first_solution_in_current_round
            take = [
                n
                for n in sols[i:]
                if n.looping or (fir is not None and n.ordinal >= fir)
            ]
        else:
            take = sols[i:]
        self.raw_answers.extend(take)
        cp.idx = len(sols)
        self.steps += len(take)
        if cp.count_sols:
            self.stats.nonleader_sols_consumed += len(take)
        return True

    def _deliver_general(self, cp):
        trail = self.trail
        frame = cp.frame
        sols = frame.solution_order
        drs_marks = (
            self.config.drs
            and cp.kind in (K_GENERATOR, K_FOLLOWER)
            and frame.stack_depth is not None
        )
        if drs_marks and cp.sol_open is not None:
            d = self._min_event_depth_since(cp.sol_open)
            if d is not None and d <= frame.stack_depth:
                TableSpace.mark_looping_solution(frame, cp.cur_sol)
            cp.sol_open = None
        restricted = cp.restricted
        fir = frame.first_solution_in_current_round
        trace = self.events is not None
        while cp.idx < len(sols):
            node = sols[cp.idx]
            cp.idx += 1
            if restricted and not (
                node.looping or (fir is not None and node.ordinal >= fir)
            ):
                continue
            trail.undo_to(cp.mark)
            self.steps += 1
            if not unify(cp.call, solution_term(node), trail):
                continue
            if cp.count_sols:
                self.stats.nonleader_sols_consumed += 1
            if trace:
                self._ev(f"consume g{frame.fid} {node.ordinal} via={cp.via}")
            if drs_marks:
                cp.sol_open = self.clock
                cp.cur_sol = node
            return cp.cont
        return None


def solve(
    program: Program,
    query: list,
    config: StrategyConfig | None = None,
    *,
    step_budget: int = DEFAULT_STEP_BUDGET,
    trace: bool = False,
    validate: bool = False,
) -> tuple[list, EvalStats]:
    """Evaluate ``query`` (a goal list) against ``program``.

    Returns the ordered answer list (instantiated query terms) and the
    evaluation statistics.  Each call uses a fresh table space.
    """
    eng = Engine(
        program, config, step_budget=step_budget, trace=trace, validate=validate
    )
    raw, stats = eng.run_query(query)
    return eng.answers(raw), stats
