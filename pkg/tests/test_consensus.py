"""Agreement, validity, termination; exhaustive equivocator sweep at n=4."""

import itertools

import numpy as np
import pytest

from qbsim.consensus import (
    BOT,
    CodecDomain,
    ConsensusInstance,
    ExplicitDomain,
    FaultModel,
    PhaseKingParty,
    equivocating_script,
    garbage_script,
    run_consensus,
    silent_script,
    tolerated_faults,
)
from qbsim.encoding import decode_ticket_list
from qbsim.errors import ConsensusUsageError
from qbsim.eventlog import EventLog
from qbsim.keystore import KeyStore
from qbsim.parties import miner
from qbsim.rng import generator
from qbsim.transport import Network


def build(n, seed=1, detail=False):
    miners = [miner(i) for i in range(n)]
    log = EventLog(detail=detail)
    net = Network(miners, KeyStore(seed), scheduler_seed=seed, log=log)
    return miners, net, log


def test_propose_validation():
    domain = ExplicitDomain([b"a", b"b"])
    inst = ConsensusInstance(0, [miner(0), miner(1)], domain)
    inst.propose(miner(0), b"a")
    inst.propose(miner(0), b"a")  # idempotent re-proposal
    assert inst.inputs[miner(0)] == b"a"
    with pytest.raises(ConsensusUsageError):
        inst.propose(miner(0), b"b")  # different re-proposal
    with pytest.raises(ConsensusUsageError):
        inst.propose(miner(1), b"z")  # outside the domain
    with pytest.raises(ConsensusUsageError):
        inst.propose(miner(7), b"a")  # not a participant


def test_all_honest_identical_input_decides_in_phase_one():
    miners, net, log = build(4)
    inst = ConsensusInstance(0, miners, ExplicitDomain([b"v"]))
    for m in miners:
        inst.propose(m, b"v")
    result = run_consensus(inst, FaultModel(), net, log)
    assert all(result.decisions[m] == b"v" for m in miners)
    assert result.decision_phase == 1
    assert not result.guarantees_void


def test_one_equivocator_among_four_cannot_shake_identical_honest_inputs():
    rng = generator(3, "byz")
    miners, net, log = build(4, seed=3)
    byz = miners[0]  # also the king of phase 1
    inst = ConsensusInstance(0, miners, ExplicitDomain([b"v", b"w"]))
    for m in miners:
        if m != byz:
            inst.propose(m, b"v")
    fm = FaultModel(frozenset([byz]), {byz: equivocating_script(rng, [b"v", b"w"])})
    result = run_consensus(inst, fm, net, log)
    assert all(result.decisions[m] == b"v" for m in result.honest)
    assert result.decision_phase <= 2  # f_actual + 1


def test_boundary_f_equals_n_over_3_flags_guarantees_void():
    miners, net, log = build(3)
    inst = ConsensusInstance(0, miners, ExplicitDomain([b"v"]))
    for m in miners[1:]:
        inst.propose(m, b"v")
    fm = FaultModel(frozenset([miners[0]]), {miners[0]: silent_script()})
    result = run_consensus(inst, fm, net, log)
    assert result.guarantees_void


def test_single_miner_decides_its_own_input():
    miners, net, log = build(1)
    inst = ConsensusInstance(0, miners, ExplicitDomain([b"solo"]))
    inst.propose(miners[0], b"solo")
    result = run_consensus(inst, FaultModel(), net, log)
    assert result.decisions[miners[0]] == b"solo"


def test_two_honest_miners_with_conflicting_inputs_agree_on_bot():
    miners, net, log = build(2)
    inst = ConsensusInstance(0, miners, ExplicitDomain([b"a", b"b"]))
    inst.propose(miners[0], b"a")
    inst.propose(miners[1], b"b")
    result = run_consensus(inst, FaultModel(), net, log)
    decisions = set(result.decisions.values())
    assert len(decisions) == 1
    assert decisions == {BOT}


def test_codec_domain_accepts_valid_encodings_and_bot():
    domain = CodecDomain(decode_ticket_list)
    assert domain.contains(BOT)
    assert not domain.contains(b"\xff\xff junk")


# ------------------------------------------------- exhaustive adversary


SILENT = object()


def run_phase_exhaustive(byz_index: int, king_index: int, choices):
    """One phase of the pure state machines at n=4, f_tol=1, honest all 'v'.

    choices: 9 entries over (3 rounds x 3 honest recipients), each
    b'v', b'w' or SILENT; silence counts as a BOT vote. Returns honest
    prefs at phase end."""
    v = b"v"
    honest = [i for i in range(4) if i != byz_index]
    states = {i: PhaseKingParty(4, 1, v) for i in honest}
    it = iter(choices)
    byz_choice = {(round_, i): next(it) for round_ in (1, 2, 3) for i in honest}

    def inject(round_, i):
        c = byz_choice[(round_, i)]
        return BOT if c is SILENT else c

    # round 1
    for i in honest:
        values = [states[j].r1_payload() if j in states else inject(1, i) for j in range(4)]
        states[i].r1_receive(values)
    # round 2
    undecided = PhaseKingParty.undecided_marker()
    payloads = {i: states[i].r2_payload() for i in honest}
    for i in honest:
        values = []
        for j in range(4):
            if j in states:
                p = payloads[j]
                values.append(undecided if p is None else p)
            else:
                values.append(inject(2, i))
        states[i].r2_receive(values)
    # round 3
    king_d = states[king_index].r3_payload() if king_index in states else None
    for i in honest:
        if king_index in states:
            states[i].r3_receive(king_d)
        else:
            states[i].r3_receive(inject(3, i))
    return [states[i].pref for i in honest]


@pytest.mark.parametrize("byz_index,king_index", [(0, 0), (3, 0)])
def test_exhaustive_equivocator_choices_cannot_break_persistence(byz_index, king_index):
    """With identical honest inputs, every possible per-recipient message
    choice of a single Byzantine miner (byzantine king included) leaves
    all honest preferences at the honest value after the phase. Phases
    compose from identical state, so this covers full runs."""
    alphabet = (b"v", b"w", SILENT)
    for choices in itertools.product(alphabet, repeat=9):
        prefs = run_phase_exhaustive(byz_index, king_index, choices)
        assert prefs == [b"v", b"v", b"v"], f"diverged under {choices}"


# --------------------------------------------------- randomized sweeps


def test_randomized_agreement_and_validity_small_sweep():
    rng = np.random.default_rng(42)
    candidates = [b"a", b"b", b"c", b"d"]
    script_factories = [
        lambda r: silent_script(),
        lambda r: garbage_script(r),
        lambda r: equivocating_script(r, candidates),
    ]
    for trial in range(300):
        n = int(rng.choice([4, 7]))
        seed = int(rng.integers(0, 2**60))
        miners, net, log = build(n, seed=seed)
        f = int(rng.integers(0, tolerated_faults(n) + 1))
        byz = frozenset(rng.choice(n, size=f, replace=False).tolist())
        byz_miners = frozenset(miner(int(i)) for i in byz)
        scripts = {}
        for i, m in enumerate(sorted(byz_miners)):
            factory = script_factories[int(rng.integers(0, len(script_factories)))]
            scripts[m] = factory(generator(seed, "byz", i))
        inst = ConsensusInstance(0, miners, ExplicitDomain(candidates))
        same_input = rng.random() < 0.5
        common = candidates[int(rng.integers(0, len(candidates)))]
        for m in miners:
            if m in byz_miners:
                continue
            value = common if same_input else candidates[int(rng.integers(0, len(candidates)))]
            inst.propose(m, value)
        result = run_consensus(inst, FaultModel(byz_miners, scripts), net, log)
        honest_values = {result.decisions[m] for m in result.honest}
        assert len(honest_values) == 1, f"agreement violated on trial {trial}"
        if same_input:
            assert honest_values == {common}, f"validity violated on trial {trial}"
        assert result.decision_phase <= result.f_actual + 1


def test_same_seed_same_decision_and_transcript():
    def run(seed):
        miners, net, log = build(4, seed=seed, detail=True)
        rng = generator(seed, "byz")
        inst = ConsensusInstance(0, miners, ExplicitDomain([b"a", b"b"]))
        for m in miners[1:]:
            inst.propose(m, b"a" if m.index % 2 else b"b")
        fm = FaultModel(frozenset([miners[0]]),
                        {miners[0]: equivocating_script(rng, [b"a", b"b"])})
        result = run_consensus(inst, fm, net, log)
        return result.decisions, result.transcript

    assert run(17) == run(17)
