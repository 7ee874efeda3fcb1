"""Context-free grammar engine driving explanation dialogues.

The generic core is an Earley recognizer (handles recursion and empty
productions), extended with viable-prefix reporting, next-terminal
enumeration, canonical parse-tree extraction, and seeded sentence
generation. :func:`iema_grammar` builds the concrete dialogue grammar whose
terminals are the 17 explanation methods plus ``Select_Variable``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import GrammarError

EPSILON = "ε"  # rendered leaf label for empty productions


@dataclass(frozen=True)
class Rule:
    lhs: str
    rhs: tuple[str, ...]  # empty tuple encodes an epsilon alternative

    def __str__(self) -> str:
        return f"{self.lhs} -> {' '.join(self.rhs) if self.rhs else EPSILON}"


@dataclass(frozen=True)
class Node:
    """Parse-tree node; leaves are terminals or the epsilon marker."""

    symbol: str
    children: tuple["Node", ...] = ()
    terminal: bool = False

    def frontier(self) -> tuple[str, ...]:
        """Leaf labels left to right, epsilon leaves removed."""
        if self.terminal:
            return () if self.symbol == EPSILON else (self.symbol,)
        out: list[str] = []
        for c in self.children:
            out.extend(c.frontier())
        return tuple(out)

    def to_nodes(self) -> list[dict]:
        """Flat, serializable node list (pre-order ids)."""
        nodes: list[dict] = []

        def walk(n: Node) -> int:
            idx = len(nodes)
            kind = "epsilon" if n.symbol == EPSILON else ("terminal" if n.terminal else "nonterminal")
            nodes.append({"id": idx, "symbol": n.symbol, "kind": kind, "children": []})
            for c in n.children:
                nodes[idx]["children"].append(walk(c))
            return idx

        walk(self)
        return nodes


@dataclass(frozen=True)
class ParseOutcome:
    accepted: bool
    tree: Node | None
    valid_prefix_len: int


@dataclass(frozen=True)
class NextSteps:
    terminals: tuple[str, ...]  # sorted
    end_of_dialogue: bool


class Grammar:
    """An immutable CFG (nonterminals, terminals, ordered rules, start).

    Construction requires every nonterminal to be productive and reachable;
    dead symbols in a dialogue grammar are authoring mistakes, and the
    prefix/next-step machinery relies on their absence.
    """

    def __init__(
        self,
        nonterminals: Iterable[str],
        terminals: Iterable[str],
        rules: Sequence[Rule],
        start: str,
    ):
        self.nonterminals = frozenset(nonterminals)
        self.terminals = frozenset(terminals)
        self.rules = tuple(rules)
        self.start = start
        self._validate()
        self._rules_by_lhs: dict[str, tuple[int, ...]] = {}
        for i, r in enumerate(self.rules):
            self._rules_by_lhs.setdefault(r.lhs, ())
            self._rules_by_lhs[r.lhs] += (i,)
        self._nullable = self._compute_nullable()
        self._check_productive_reachable()
        self._min_alt = self._compute_min_alternatives()
        self._initial_chart = self._closure_of_start()

    # -- construction helpers ------------------------------------------------

    def _validate(self) -> None:
        overlap = self.nonterminals & self.terminals
        if overlap:
            raise GrammarError(f"symbol(s) both terminal and nonterminal: {sorted(overlap)}")
        if self.start not in self.nonterminals:
            raise GrammarError(f"start symbol {self.start!r} is not a nonterminal")
        alphabet = self.nonterminals | self.terminals
        for r in self.rules:
            if r.lhs not in self.nonterminals:
                raise GrammarError(f"rule lhs {r.lhs!r} is not a nonterminal")
            for s in r.rhs:
                if s not in alphabet:
                    raise GrammarError(f"rule symbol {s!r} not in the alphabet ({r})")

    def _compute_nullable(self) -> frozenset[str]:
        nullable: set[str] = set()
        changed = True
        while changed:
            changed = False
            for r in self.rules:
                if r.lhs not in nullable and all(s in nullable for s in r.rhs):
                    nullable.add(r.lhs)
                    changed = True
        return frozenset(nullable)

    def _check_productive_reachable(self) -> None:
        productive: set[str] = set(self.terminals)
        changed = True
        while changed:
            changed = False
            for r in self.rules:
                if r.lhs not in productive and all(s in productive for s in r.rhs):
                    productive.add(r.lhs)
                    changed = True
        dead = self.nonterminals - productive
        if dead:
            raise GrammarError(f"unproductive nonterminal(s): {sorted(dead)}")
        reachable: set[str] = {self.start}
        frontier = [self.start]
        while frontier:
            sym = frontier.pop()
            for i in self._rules_by_lhs_safe(sym):
                for s in self.rules[i].rhs:
                    if s in self.nonterminals and s not in reachable:
                        reachable.add(s)
                        frontier.append(s)
        unreachable = self.nonterminals - reachable
        if unreachable:
            raise GrammarError(f"unreachable nonterminal(s): {sorted(unreachable)}")

    def _rules_by_lhs_safe(self, sym: str) -> tuple[int, ...]:
        return self._rules_by_lhs.get(sym, ())

    def _compute_min_alternatives(self) -> dict[str, int]:
        """Per nonterminal, the alternative that terminates fastest.

        Epsilon alternatives win outright; otherwise the rule with the
        smallest total expansion count. Used when a generation budget runs out.
        """
        INF = float("inf")
        cost: dict[str, float] = {nt: INF for nt in self.nonterminals}
        changed = True
        while changed:
            changed = False
            for r in self.rules:
                c = 1.0
                for s in r.rhs:
                    c += 0.0 if s in self.terminals else cost[s]
                if c < cost[r.lhs]:
                    cost[r.lhs] = c
                    changed = True
        best: dict[str, int] = {}
        for nt in self.nonterminals:
            indices = self._rules_by_lhs_safe(nt)
            eps = [i for i in indices if not self.rules[i].rhs]
            if eps:
                best[nt] = eps[0]
                continue
            best_i, best_c = indices[0], INF
            for i in indices:
                c = 1.0 + sum(
                    0.0 if s in self.terminals else cost[s] for s in self.rules[i].rhs
                )
                if c < best_c:
                    best_i, best_c = i, c
            best[nt] = best_i
        return best

    # -- Earley machinery ----------------------------------------------------
    # items are (rule_index, dot, origin) triples

    def _closure(self, charts: list[set], k: int) -> None:
        chart = charts[k]
        agenda = list(chart)
        rules = self.rules
        while agenda:
            item = agenda.pop()
            r, dot, origin = item
            rhs = rules[r].rhs
            if dot == len(rhs):  # completer
                lhs = rules[r].lhs
                for r2, d2, o2 in list(charts[origin]):
                    rhs2 = rules[r2].rhs
                    if d2 < len(rhs2) and rhs2[d2] == lhs:
                        advanced = (r2, d2 + 1, o2)
                        if advanced not in chart:
                            chart.add(advanced)
                            agenda.append(advanced)
                continue
            sym = rhs[dot]
            if sym in self.nonterminals:  # predictor
                for r2 in self._rules_by_lhs_safe(sym):
                    predicted = (r2, 0, k)
                    if predicted not in chart:
                        chart.add(predicted)
                        agenda.append(predicted)
                if sym in self._nullable:  # pre-advance over nullable symbols
                    advanced = (r, dot + 1, origin)
                    if advanced not in chart:
                        chart.add(advanced)
                        agenda.append(advanced)

    def _closure_of_start(self) -> frozenset:
        charts: list[set] = [{(i, 0, 0) for i in self._rules_by_lhs_safe(self.start)}]
        self._closure(charts, 0)
        return frozenset(charts[0])

    def _check_alphabet(self, sentence: Sequence[str]) -> None:
        for s in sentence:
            if s not in self.terminals:
                raise GrammarError(f"symbol {s!r} is not a terminal of this grammar")

    def _charts(self, tokens: Sequence[str]) -> tuple[list[set], int]:
        """Earley charts; returns (charts, k) where k = tokens consumed before
        the chart died (k == len(tokens) means the full input was consumed)."""
        charts: list[set] = [set(self._initial_chart)]
        rules = self.rules
        for k, tok in enumerate(tokens):
            nxt = set()
            for item in charts[k]:
                r, dot, origin = item
                rhs = rules[r].rhs
                if dot < len(rhs) and rhs[dot] == tok:
                    nxt.add((r, dot + 1, origin))
            if not nxt:
                return charts, k
            charts.append(nxt)
            self._closure(charts, k + 1)
        return charts, len(tokens)

    def _is_complete(self, charts: list[set], n: int) -> bool:
        for r, dot, origin in charts[n]:
            rule = self.rules[r]
            if origin == 0 and rule.lhs == self.start and dot == len(rule.rhs):
                return True
        return False

    # -- public operations ---------------------------------------------------

    def accepts(self, sentence: Sequence[str]) -> ParseOutcome:
        """Membership plus one canonical tree, or the longest viable prefix.

        The canonical tree is the first parse found when alternatives are
        tried in rule-declaration order (a leftmost derivation).
        """
        sentence = tuple(sentence)
        self._check_alphabet(sentence)
        charts, consumed = self._charts(sentence)
        if consumed < len(sentence) or not self._is_complete(charts, len(sentence)):
            return ParseOutcome(accepted=False, tree=None, valid_prefix_len=consumed)
        tree = self._extract_tree(sentence, charts)
        return ParseOutcome(accepted=True, tree=tree, valid_prefix_len=len(sentence))

    def is_valid_prefix(self, prefix: Sequence[str]) -> bool:
        prefix = tuple(prefix)
        self._check_alphabet(prefix)
        _, consumed = self._charts(prefix)
        return consumed == len(prefix)

    def next_steps(self, prefix: Sequence[str]) -> NextSteps:
        """Terminals that keep the prefix viable, and whether it is a sentence."""
        prefix = tuple(prefix)
        self._check_alphabet(prefix)
        charts, consumed = self._charts(prefix)
        if consumed < len(prefix):
            raise GrammarError(
                f"invalid prefix: token {prefix[consumed]!r} at position {consumed}"
            )
        terminals = set()
        for r, dot, _ in charts[len(prefix)]:
            rhs = self.rules[r].rhs
            if dot < len(rhs) and rhs[dot] in self.terminals:
                terminals.add(rhs[dot])
        return NextSteps(
            terminals=tuple(sorted(terminals)),
            end_of_dialogue=self._is_complete(charts, len(prefix)),
        )

    # -- canonical tree extraction -------------------------------------------

    def _completed_spans(self, charts: list[set]) -> dict:
        spans: dict[tuple[str, int], set[int]] = {}
        for k, chart in enumerate(charts):
            for r, dot, origin in chart:
                rule = self.rules[r]
                if dot == len(rule.rhs):
                    spans.setdefault((rule.lhs, origin), set()).add(k)
        return spans

    def _extract_tree(self, tokens: tuple[str, ...], charts: list[set]) -> Node:
        spans = self._completed_spans(charts)
        n = len(tokens)
        for node, end in self._realize(self.start, 0, tokens, spans, frozenset()):
            if end == n:
                return node
        raise GrammarError("internal: recognizer accepted but no tree was built")

    def _realize(self, sym: str, pos: int, tokens, spans, active):
        """Yield (Node, end) parses of ``sym`` starting at ``pos``, canonical first.

        ``active`` guards against non-consuming derivation cycles (A =>+ A);
        such cycles are skipped, which still leaves every sentence at least
        one tree.
        """
        if sym in self.terminals:
            if pos < len(tokens) and tokens[pos] == sym:
                yield Node(sym, (), True), pos + 1
            return
        if (sym, pos) in active or (sym, pos) not in spans:
            return
        child_active = active | {(sym, pos)}
        for r in self._rules_by_lhs_safe(sym):
            rhs = self.rules[r].rhs
            if not rhs:
                yield Node(sym, (Node(EPSILON, (), True),)), pos
                continue
            for children, end in self._seq(rhs, 0, pos, tokens, spans, child_active):
                yield Node(sym, tuple(children)), end

    def _seq(self, rhs, idx, pos, tokens, spans, active):
        if idx == len(rhs):
            yield [], pos
            return
        for node, mid in self._realize(rhs[idx], pos, tokens, spans, active):
            nested_active = active if mid == pos else frozenset()
            for rest, end in self._seq(rhs, idx + 1, mid, tokens, spans, nested_active):
                yield [node] + rest, end

    def derivation_count(self, sentence: Sequence[str], cap: int = 10_000) -> int:
        """Number of distinct parse trees (ambiguity diagnostic), capped.

        Derivations that cycle without consuming input are not counted.
        """
        sentence = tuple(sentence)
        self._check_alphabet(sentence)
        charts, consumed = self._charts(sentence)
        if consumed < len(sentence) or not self._is_complete(charts, len(sentence)):
            return 0
        spans = self._completed_spans(charts)
        n = len(sentence)
        count = 0
        for _, end in self._realize(self.start, 0, sentence, spans, frozenset()):
            if end == n:
                count += 1
                if count >= cap:
                    return count
        return count

    # -- generation ------------------------------------------------------------

    def generate(self, max_expansions: int, seed: int) -> tuple[tuple[str, ...], Node]:
        """Seeded random derivation, uniform over alternatives.

        Once ``max_expansions`` rule applications have been spent, every
        remaining nonterminal takes its fastest-terminating alternative
        (its epsilon alternative whenever one exists).
        """
        if max_expansions < 1:
            raise GrammarError("max_expansions must be >= 1")
        rng = random.Random(seed)
        spent = 0

        def expand(sym: str) -> Node:
            nonlocal spent
            if sym in self.terminals:
                return Node(sym, (), True)
            indices = self._rules_by_lhs_safe(sym)
            if spent >= max_expansions:
                r = self._min_alt[sym]
            else:
                r = indices[rng.randrange(len(indices))]
            spent += 1
            rhs = self.rules[r].rhs
            if not rhs:
                return Node(sym, (Node(EPSILON, (), True),))
            return Node(sym, tuple(expand(s) for s in rhs))

        tree = expand(self.start)
        return tree.frontier(), tree

    # -- rendering and export ----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "nonterminals": sorted(self.nonterminals),
            "terminals": sorted(self.terminals),
            "start": self.start,
            "rules": [{"lhs": r.lhs, "rhs": list(r.rhs)} for r in self.rules],
        }


def render_tree(tree: Node, indent: str = "  ") -> str:
    """Deterministic indented rendering; terminal leaves are starred."""
    lines: list[str] = []

    def walk(n: Node, depth: int) -> None:
        marker = "* " if n.terminal and n.symbol != EPSILON else ""
        lines.append(f"{indent * depth}{marker}{n.symbol}")
        for c in n.children:
            walk(c, depth + 1)

    walk(tree, 0)
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# the built-in dialogue grammar

SELECT_VARIABLE = "Select_Variable"

DATA_PARTS_TERMINALS = ("Pairwise_Correlation", "Graphical_Networks")
DATA_PROFILE_TERMINALS = ("Scatter_Plot", "Mosaic_Plot")
DATA_DISTRIBUTION_TERMINALS = ("Histogram", "Boxplot", "Barplot")
MODEL_PARTS_TERMINALS = ("Permutational_Importance", "LOCO_Importance", "SHAP_Importance")
MODEL_PROFILE_TERMINALS = ("Partial_Dependence", "Accumulated_Local", "SHAP_Dependence")
INSTANCE_PARTS_TERMINALS = ("SHAP_Attribution", "BD_Attribution", "LIME_Attribution")
INSTANCE_PROFILE_TERMINALS = ("Ceteris_Paribus",)

ALL_TERMINALS = (
    DATA_PARTS_TERMINALS
    + DATA_PROFILE_TERMINALS
    + DATA_DISTRIBUTION_TERMINALS
    + MODEL_PARTS_TERMINALS
    + MODEL_PROFILE_TERMINALS
    + INSTANCE_PARTS_TERMINALS
    + INSTANCE_PROFILE_TERMINALS
    + (SELECT_VARIABLE,)
)


@lru_cache(maxsize=1)
def iema_grammar() -> Grammar:
    """The dialogue grammar: 17 nonterminals, 18 terminals, start `explanation`."""
    R = Rule
    rules = [
        R("explanation", ("instance_explanation",)),
        R("explanation", ("model_explanation",)),
        R("explanation", ("data_explanation",)),
        R("instance_explanation", ("instance_parts", "instance_parts_")),
        R("instance_parts_", (SELECT_VARIABLE, "instance_profile", "instance_profile_", "instance_parts_")),
        R("instance_parts_", ("model_parts", "model_parts_", "instance_parts_")),
        R("instance_parts_", ()),
        R("instance_profile_", ("data_distribution", "instance_profile_")),
        R("instance_profile_", ("model_profile", "model_profile_", "instance_profile_")),
        R("instance_profile_", ()),
        R("model_explanation", ("model_parts", "model_parts_")),
        R("model_parts_", (SELECT_VARIABLE, "model_profile", "model_profile_", "model_parts_")),
        R("model_parts_", ("data_parts", "data_parts_", "model_parts_")),
        R("model_parts_", ()),
        R("model_profile_", ("data_profile", "data_profile_", "model_profile_")),
        R("model_profile_", ("data_distribution", "model_profile_")),
        R("model_profile_", ()),
        R("data_explanation", ("data_parts", "data_parts_")),
        R("data_explanation", ()),
        R("data_parts_", ("data_profile", "data_profile_")),
        R("data_parts_", ()),
        R("data_profile_", ("data_profile", "data_parts_")),
        R("data_profile_", ("data_distribution",)),
        R("data_profile_", ()),
    ]
    for t in DATA_PARTS_TERMINALS:
        rules.append(R("data_parts", (t,)))
    for t in DATA_PROFILE_TERMINALS:
        rules.append(R("data_profile", (t,)))
    for t in DATA_DISTRIBUTION_TERMINALS:
        rules.append(R("data_distribution", (t,)))
    for t in MODEL_PARTS_TERMINALS:
        rules.append(R("model_parts", (t,)))
    for t in MODEL_PROFILE_TERMINALS:
        rules.append(R("model_profile", (t,)))
    for t in INSTANCE_PARTS_TERMINALS:
        rules.append(R("instance_parts", (t,)))
    for t in INSTANCE_PROFILE_TERMINALS:
        rules.append(R("instance_profile", (t,)))

    nonterminals = {r.lhs for r in rules}
    return Grammar(
        nonterminals=nonterminals,
        terminals=ALL_TERMINALS,
        rules=rules,
        start="explanation",
    )
