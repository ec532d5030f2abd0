"""Search tests.

Two oracles here: an arbitrary-precision recomputation of the UCT score
(mpmath at 50 digits), and a plain-dict scripted simulation of the whole
select/expand/backpropagate/bigstep loop that prove() must reproduce
node for node.
"""

import math
import random

import mpmath
import pytest

from contab.clausify import clausify_text
from contab.policy import FixedEntropyPredictor, UniformPredictor, predict
from contab.search import (
    DISCOUNT,
    HARVEST_CAP,
    MCTSNode,
    SearchLimits,
    bigstep,
    format_result_line,
    prove,
    uct_score,
)
from contab.tableau import Engine

TRIVIAL = "fof(ax, axiom, p(a)).\nfof(c, conjecture, p(a))."
CHAIN3 = (
    "cnf(a1, axiom, q(a)).\ncnf(a2, axiom, p(X) | ~q(X)).\n"
    "fof(c, conjecture, p(a))."
)
DEADEND = "cnf(g, negated_conjecture, ~q(a)).\ncnf(ax, axiom, p(a))."
INFINITE = "cnf(rule, axiom, p(X) | ~p(f(X))).\nfof(c, conjecture, p(a))."
BRANCHY = (
    "cnf(a1, axiom, p(X) | q(X)).\ncnf(a2, axiom, p(X) | r(X)).\n"
    "cnf(a3, axiom, ~q(X) | r(X)).\ncnf(a4, axiom, ~r(X) | q(X)).\n"
    "cnf(a5, axiom, ~q(X) | s(X)).\ncnf(a6, axiom, ~s(X) | q(X)).\n"
    "fof(c, conjecture, p(a))."
)


def make_node(prior=1.0, visits=0, reward=0.0, has_proof=False, depth=1):
    n = MCTSNode(None, None, -1, prior, depth)
    n.visits = visits
    n.reward_sum = reward
    n.has_proof = has_proof
    return n


class TestUctScore:
    def test_log_term_vanishes_at_one_parent_visit(self):
        child = make_node(prior=1.0, visits=1, reward=1.0)
        assert uct_score(child, 1, 1.0) == 1.0

    def test_exploration_only_closed_form(self):
        child = make_node(prior=0.5, visits=1, reward=0.0)
        assert uct_score(child, math.e, 2.0) == pytest.approx(1.0, abs=1e-15)

    def test_matches_high_precision_oracle(self):
        rng = random.Random(101)
        mpmath.mp.dps = 50
        for _ in range(1000):
            n = rng.randrange(1, 1000)
            big_n = n + rng.randrange(1, 2000)
            r = rng.random() * n
            p = rng.random()
            cp = rng.choice([0.5, 1.0, 2.0])
            child = make_node(prior=p, visits=n, reward=r)
            got = uct_score(child, big_n, cp)
            want = mpmath.mpf(r) / n + mpmath.mpf(cp) * mpmath.mpf(p) * mpmath.sqrt(
                mpmath.log(big_n) / n
            )
            assert abs(got - float(want)) <= 1e-12 * max(1.0, abs(float(want)))

    def test_argmax_matches_high_precision_oracle(self):
        rng = random.Random(2024)
        mpmath.mp.dps = 50
        for _ in range(1000):
            k = rng.randrange(2, 8)
            parent_n = 1
            children = []
            for _ in range(k):
                n = rng.randrange(1, 60)
                parent_n += n
                children.append(make_node(prior=rng.random(), visits=n, reward=rng.random() * n))
            cp = rng.choice([0.5, 1.0, 2.0])
            got = max(range(k), key=lambda i: uct_score(children[i], parent_n, cp))
            scores = [
                mpmath.mpf(c.reward_sum) / c.visits
                + mpmath.mpf(cp) * mpmath.mpf(c.prior) * mpmath.sqrt(mpmath.log(parent_n) / c.visits)
                for c in children
            ]
            want = max(range(k), key=lambda i: scores[i])
            assert got == want

    def test_least_visited_wins_under_equal_priors_and_means(self):
        children = [
            make_node(prior=0.25, visits=v, reward=0.5 * v) for v in (7, 3, 9, 5)
        ]
        parent_n = 1 + sum(c.visits for c in children)
        scores = [uct_score(c, parent_n, 1.0) for c in children]
        assert scores.index(max(scores)) == 1


class TestBigstep:
    def test_picks_highest_mean(self):
        root = make_node(depth=0)
        root.children = [
            make_node(visits=10, reward=2.0),
            make_node(visits=10, reward=9.0),
        ]
        assert bigstep(root) is root.children[1]

    def test_tie_goes_to_lowest_action_index(self):
        root = make_node(depth=0)
        root.children = [
            make_node(visits=4, reward=2.0),
            make_node(visits=4, reward=2.0),
        ]
        assert bigstep(root) is root.children[0]

    def test_proof_subtree_beats_any_mean(self):
        root = make_node(depth=0)
        root.children = [
            make_node(visits=10, reward=9.9),
            make_node(visits=10, reward=0.1, has_proof=True),
        ]
        assert bigstep(root) is root.children[1]

    def test_unexpanded_slots_are_ignored(self):
        root = make_node(depth=0)
        root.children = [None, make_node(visits=1, reward=0.2), None]
        assert bigstep(root) is root.children[1]

    def test_no_expanded_child_gives_none(self):
        root = make_node(depth=0)
        root.children = [None, None]
        assert bigstep(root) is None


class TestStatuses:
    def test_trivial_problem_solves_quickly(self):
        engine = Engine(clausify_text(TRIVIAL))
        result = prove(engine, "triv", UniformPredictor(), SearchLimits())
        assert result.status == "solved"
        assert result.solved
        assert result.inferences < 10
        assert engine.check_proof(result.proof)

    def test_disconnected_goal_is_a_dead_end(self):
        engine = Engine(clausify_text(DEADEND))
        result = prove(engine, "dead", UniformPredictor(), SearchLimits())
        assert result.status == "dead-end"
        assert result.proof is None

    def test_infinite_space_exhausts_budget(self):
        engine = Engine(clausify_text(INFINITE))
        limits = SearchLimits(inference_limit=50, bigstep_frequency=10)
        result = prove(engine, "inf", UniformPredictor(), limits)
        assert result.status == "budget-exhausted"
        assert result.inferences == 50
        assert result.proof is None

    def test_result_line_format(self):
        engine = Engine(clausify_text(TRIVIAL))
        result = prove(engine, "triv", UniformPredictor())
        line = format_result_line(result, "traces/triv.trace")
        assert line.startswith("problem=triv status=solved ")
        assert "trace=traces/triv.trace" in line


class TestRewards:
    def test_proof_leaf_reward_discounts_by_depth(self):
        engine = Engine(clausify_text(CHAIN3))
        result = prove(engine, "chain", UniformPredictor())
        assert result.solved
        assert len(result.proof) == 3
        leaf = result.bigstep_nodes[0]
        while not leaf.is_proof:
            leaf = next(c for c in leaf.children if c is not None and c.has_proof)
        assert leaf.depth == 3
        assert leaf.terminal_reward == pytest.approx(DISCOUNT**3)
        assert leaf.terminal_reward == pytest.approx(0.9703, abs=5e-4)

    def test_two_step_proof_reward(self):
        engine = Engine(clausify_text(TRIVIAL))
        result = prove(engine, "triv", UniformPredictor())
        leaf = result.bigstep_nodes[0]
        while not leaf.is_proof:
            leaf = next(c for c in leaf.children if c is not None and c.has_proof)
        assert leaf.terminal_reward == pytest.approx(DISCOUNT**2)


class TestTreeInvariants:
    def run_tree(self, text, limit=400):
        engine = Engine(clausify_text(text))
        limits = SearchLimits(inference_limit=limit, bigstep_frequency=25)
        result = prove(engine, "t", UniformPredictor(), limits)
        return result.bigstep_nodes[0]

    def walk(self, node):
        yield node
        for c in node.children:
            if c is not None:
                yield from self.walk(c)

    @pytest.mark.parametrize("text", [BRANCHY, INFINITE, CHAIN3])
    def test_visit_conservation_and_reward_bounds(self, text):
        root = self.run_tree(text)
        seen = 0
        for node in self.walk(root):
            seen += 1
            assert node.visits >= 1
            assert -1e-9 <= node.mean <= 1.0 + 1e-9
            if node.children:
                expanded = [c for c in node.children if c is not None]
                assert node.visits == 1 + sum(c.visits for c in expanded)
                assert len(node.children) == len(node.actions)
        assert seen > 3

    def test_prior_normalization(self):
        root = self.run_tree(BRANCHY)
        for node in self.walk(root):
            if node.priors is not None and node.children:
                assert sum(node.priors) == pytest.approx(1.0, abs=1e-6)
                for i, c in enumerate(node.children):
                    if c is not None:
                        assert c.prior == pytest.approx(node.priors[i])

    def test_single_playout_counts(self):
        engine = Engine(clausify_text(TRIVIAL))
        limits = SearchLimits(inference_limit=1, bigstep_frequency=1000)
        result = prove(engine, "t", UniformPredictor(), limits)
        root = result.bigstep_nodes[0]
        assert result.playouts == 1
        assert root.visits == 2

    def test_budget_equals_engine_apply_calls(self):
        calls = 0

        class CountingEngine(Engine):
            def apply(self, s, a):
                nonlocal calls
                calls += 1
                return super().apply(s, a)

        engine = CountingEngine(clausify_text(INFINITE))
        limits = SearchLimits(inference_limit=77, bigstep_frequency=10)
        result = prove(engine, "t", UniformPredictor(), limits)
        assert result.inferences == calls == 77


class TestDeterminism:
    def fingerprint(self, result):
        return (
            format_result_line(result),
            tuple(a.encode() for a in result.proof or []),
            result.mean_entropy,
            result.mean_normalized_entropy,
            result.entropy_count,
        )

    @pytest.mark.parametrize("text", [BRANCHY, INFINITE, CHAIN3])
    def test_repeat_runs_are_identical(self, text):
        limits = SearchLimits(inference_limit=300, bigstep_frequency=20)
        outs = []
        for _ in range(2):
            engine = Engine(clausify_text(text))
            predictor = FixedEntropyPredictor(UniformPredictor(), 0.6, seed=5)
            outs.append(self.fingerprint(prove(engine, "d", predictor, limits, seed=3)))
        assert outs[0] == outs[1]


# --- scripted whole-loop simulation ----------------------------------------


class SimNode:
    def __init__(self, state, parent, action_index, prior, depth):
        self.state = state
        self.parent = parent
        self.action_index = action_index
        self.prior = prior
        self.depth = depth
        self.actions = []
        self.priors = None
        self.children = []
        self.visits = 0
        self.reward_sum = 0.0
        self.is_proof = False
        self.has_proof = False
        self.fully_explored = False


def simulate(engine, predictor, limits):
    """Step-by-step reimplementation of the documented search loop."""
    from contab.policy import entropy, normalized_entropy

    inferences = 0
    playouts = 0
    ent_sum = nent_sum = 0.0
    ent_n = 0
    proof_leaf = None

    def evaluate(node):
        nonlocal ent_sum, nent_sum, ent_n
        if engine.is_closed(node.state):
            node.fully_explored = True
            node.is_proof = True
            return DISCOUNT**node.depth
        node.actions = engine.legal_actions(node.state)
        probs, value = predict(predictor, node.state, node.actions, engine.matrix)
        if not node.actions:
            node.fully_explored = True
            return 0.0
        node.priors = list(probs)
        node.children = [None] * len(node.actions)
        ent_sum += entropy(probs)
        nent_sum += normalized_entropy(probs)
        ent_n += 1
        return value

    root = SimNode(engine.root_state(), None, -1, 1.0, 0)
    r = evaluate(root)
    root.visits, root.reward_sum = 1, r

    def select(node):
        log_n = math.log(node.visits)
        best, best_score = -1, -math.inf
        for i, child in enumerate(node.children):
            if child is None:
                score = limits.cp * node.priors[i] * math.sqrt(log_n)
            elif child.fully_explored:
                continue
            else:
                score = child.reward_sum / child.visits + limits.cp * child.prior * math.sqrt(
                    log_n / child.visits
                )
            if score > best_score:
                best, best_score = i, score
        return best

    def mark_explored_up(node):
        cur = node.parent
        while cur is not None:
            if any(c is None or not c.fully_explored for c in cur.children):
                break
            cur.fully_explored = True
            cur = cur.parent

    def playout(start):
        nonlocal inferences, playouts, proof_leaf
        node = start
        while True:
            i = select(node)
            if i < 0:
                node.fully_explored = True
                mark_explored_up(node)
                return None
            if node.children[i] is not None:
                node = node.children[i]
                continue
            if inferences >= limits.inference_limit:
                return None
            leaf = SimNode(
                engine.apply(node.state, node.actions[i]), node, i, node.priors[i], node.depth + 1
            )
            inferences += 1
            node.children[i] = leaf
            reward = evaluate(leaf)
            leaf.visits, leaf.reward_sum = 1, reward
            cur = node
            while cur is not None:
                cur.visits += 1
                cur.reward_sum += reward
                cur = cur.parent
            if leaf.fully_explored:
                mark_explored_up(leaf)
            if leaf.is_proof:
                cur = leaf
                while cur is not None:
                    cur.has_proof = True
                    cur = cur.parent
                proof_leaf = leaf
            playouts += 1
            return leaf

    current = root
    n_bigsteps = 0
    since = 0
    status = "budget-exhausted"
    while True:
        if current.fully_explored:
            status = "dead-end" if proof_leaf is None else "solved"
            break
        if inferences >= limits.inference_limit:
            break
        leaf = playout(current)
        if proof_leaf is not None:
            status = "solved"
            break
        if leaf is None:
            continue
        since += 1
        if since >= limits.bigstep_frequency:
            best, best_key = None, None
            for child in current.children:
                if child is None:
                    continue
                key = (1 if child.has_proof else 0, child.reward_sum / child.visits)
                if best_key is None or key > best_key:
                    best, best_key = child, key
            if best is None:
                status = "dead-end"
                break
            current = best
            n_bigsteps += 1
            since = 0

    proof = None
    if proof_leaf is not None:
        status = "solved"
        path = []
        node = proof_leaf
        while node.parent is not None:
            path.append(node.parent.actions[node.action_index])
            node = node.parent
        proof = path[::-1]
    return {
        "root": root,
        "status": status,
        "inferences": inferences,
        "playouts": playouts,
        "bigsteps": n_bigsteps,
        "proof": proof,
        "ent_sum": ent_sum,
        "nent_sum": nent_sum,
        "ent_n": ent_n,
    }


def assert_same_tree(real, sim):
    assert real.visits == sim.visits
    assert real.reward_sum == pytest.approx(sim.reward_sum, abs=1e-12)
    assert real.is_proof == sim.is_proof
    assert real.fully_explored == sim.fully_explored
    assert len(real.children) == len(sim.children)
    for rc, sc in zip(real.children, sim.children):
        assert (rc is None) == (sc is None)
        if rc is not None:
            assert_same_tree(rc, sc)


class TestScriptedSimulation:
    CONFIGS = [
        (BRANCHY, 120, 7, "uniform"),
        (BRANCHY, 250, 11, "fixed"),
        (INFINITE, 90, 9, "uniform"),
        (CHAIN3, 50, 4, "uniform"),
        (DEADEND, 50, 5, "uniform"),
        (TRIVIAL, 50, 5, "fixed"),
    ]

    @pytest.mark.parametrize("text,limit,freq,kind", CONFIGS)
    def test_prove_matches_simulation(self, text, limit, freq, kind):
        limits = SearchLimits(inference_limit=limit, bigstep_frequency=freq)

        def predictor():
            if kind == "fixed":
                return FixedEntropyPredictor(UniformPredictor(), 0.55, seed=11)
            return UniformPredictor()

        engine = Engine(clausify_text(text))
        result = prove(engine, "sim", predictor(), limits)
        sim = simulate(Engine(clausify_text(text)), predictor(), limits)

        assert result.status == sim["status"]
        assert result.inferences == sim["inferences"]
        assert result.playouts == sim["playouts"]
        assert result.bigsteps == sim["bigsteps"]
        got_proof = [a.encode() for a in result.proof or []]
        want_proof = [a.encode() for a in sim["proof"] or []]
        assert got_proof == want_proof
        assert result.entropy_count == sim["ent_n"]
        if sim["ent_n"]:
            assert result.mean_entropy == pytest.approx(sim["ent_sum"] / sim["ent_n"], abs=1e-12)
            assert result.mean_normalized_entropy == pytest.approx(
                sim["nent_sum"] / sim["ent_n"], abs=1e-12
            )
        assert_same_tree(result.bigstep_nodes[0], sim["root"])


class TestHarvest:
    def test_collect_states_records_decision_points(self):
        engine = Engine(clausify_text(BRANCHY))
        limits = SearchLimits(inference_limit=200, bigstep_frequency=20)
        result = prove(engine, "h", UniformPredictor(), limits, collect_states=True)
        assert result.harvested
        assert len(result.harvested) <= HARVEST_CAP
        from contab.tableau import decode_action

        for path, n_actions in result.harvested:
            assert n_actions >= 2
            state = engine.root_state()
            for enc in path:
                state = engine.apply(state, decode_action(enc))
            assert len(engine.legal_actions(state)) == n_actions

    def test_collect_states_off_by_default(self):
        engine = Engine(clausify_text(BRANCHY))
        result = prove(engine, "h", UniformPredictor(), SearchLimits(inference_limit=50))
        assert result.harvested == []


class TestLimitValidation:
    def test_rejects_nonpositive_values(self):
        with pytest.raises(ValueError):
            SearchLimits(inference_limit=0)
        with pytest.raises(ValueError):
            SearchLimits(bigstep_frequency=0)
        with pytest.raises(ValueError):
            SearchLimits(cp=0.0)
        with pytest.raises(ValueError):
            SearchLimits(wall_clock=-1.0)

    def test_defaults(self):
        limits = SearchLimits()
        assert limits.inference_limit == 20000
        assert limits.bigstep_frequency == 200
        assert limits.cp == 1.0
