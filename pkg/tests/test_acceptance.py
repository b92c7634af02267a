"""Acceptance suite: one test per release criterion.

Each test prints ``[acceptance] <name>: PASS/FAIL`` so a plain
``pytest tests/test_acceptance.py -v -s`` doubles as the sign-off checklist.
Everything here is seeded and deterministic.
"""

import contextlib
import json
import math
import statistics
import time
from random import Random

import pytest

import dermrank.cli as cli
from dermrank.engine import (
    RankingConfig,
    category_score,
    category_score_from_values,
    rank_all,
    select_diagnoses,
    similarity,
)
from dermrank.kb import (
    FrequencyLevel,
    Judgement,
    JudgementEntry,
    Sex,
    CaseParseError,
    frequency_to_prior,
    full_scale_template,
    generate_synthetic_case,
    generate_synthetic_kb,
    judgement_to_likelihood,
    parse_case,
    parse_kb,
)
from dermrank.kb.model import PatientCase, Selection
from dermrank.oracle import compare_orderings, oracle_rank_all

from conftest import case_document, fixture_kb_document


@contextlib.contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"[acceptance] {name}: FAIL")
        raise
    print(f"[acceptance] {name}: PASS")


def fixture_kb():
    return parse_kb(json.dumps(fixture_kb_document()))


def test_worked_example_fidelity():
    with criterion("worked-example fidelity (form category, 0.0700 +/- 0.0005)"):
        kb = fixture_kb()
        score = category_score(
            kb.category("form"), ("domeShaped", "umbilicated"), kb.disease("afx")
        )
        assert abs(score - 0.07) <= 5e-4
        assert score == pytest.approx(math.sqrt(0.02) / 2.02, rel=1e-12)


def test_encoding_fidelity():
    with criterion("encoding fidelity (10 golden judgement/frequency values)"):
        assert judgement_to_likelihood(JudgementEntry(Judgement.YES)) == 1.0
        assert judgement_to_likelihood(JudgementEntry(Judgement.UNLIKELY)) == 0.02
        assert judgement_to_likelihood(JudgementEntry(Judgement.NO, exclusive=False)) == 0.001
        assert judgement_to_likelihood(JudgementEntry(Judgement.NO, exclusive=True)) == 0.0
        assert frequency_to_prior(FrequencyLevel.EXCEPTIONAL) == 1e-7
        assert frequency_to_prior(FrequencyLevel.RARE) == 1e-6
        assert frequency_to_prior(FrequencyLevel.UNCOMMON) == 1e-5
        assert frequency_to_prior(FrequencyLevel.LESS_COMMON) == 1e-4
        assert frequency_to_prior(FrequencyLevel.COMMON) == 1e-3
        assert frequency_to_prior(FrequencyLevel.VERY_COMMON) == 1e-2


def test_oracle_equivalence_over_100_seeded_instances():
    with criterion("oracle equivalence (100 KBs, seeds 1-100, rel err <= 1e-9, < 30 s)"):
        started = time.perf_counter()
        worst = 0.0
        for seed in range(1, 101):
            kb = generate_synthetic_kb(20, seed=seed)
            case = generate_synthetic_case(
                kb, kb.diseases[seed % 20].id, noise=0.3, seed=seed, max_categories=12
            )
            assert len(case.observations) <= 12
            report = compare_orderings(rank_all(kb, case), oracle_rank_all(kb, case))
            assert report.agree, f"ordering diverged on seed {seed}: {report.first_divergence}"
            worst = max(worst, report.max_relative_value_error)
        elapsed = time.perf_counter() - started
        assert worst <= 1e-9
        assert elapsed < 30.0


def test_property_exclusion_soundness():
    with criterion("property: excluded diseases are never selected (1000 instances)"):
        wide_open = RankingConfig(
            similarity_threshold=-math.inf, rank_threshold=-math.inf, max_results=100
        )
        from dermrank.kb import NoSignalError

        for seed in range(1000):
            kb = generate_synthetic_kb(8, seed=seed)
            case = None
            for offset in range(8):  # rare: a drawn disease may have no 'yes' at all
                try:
                    case = generate_synthetic_case(
                        kb, kb.diseases[(seed + offset) % 8].id, noise=0.5, seed=seed
                    )
                    break
                except NoSignalError:
                    continue
            assert case is not None
            ranked = rank_all(kb, case)
            excluded = {r.disease for r in ranked if r.excluded}
            for chosen in select_diagnoses(ranked, wide_open):
                assert chosen.disease not in excluded


def test_property_scale_invariance():
    with criterion("property: category score invariant under positive scaling (1000 draws)"):
        rng = Random(0)
        for _ in range(1000):
            n = rng.randint(1, 12)
            values = [10.0 ** rng.uniform(-6.0, 6.0) for _ in range(n)]
            k = rng.randint(1, n)
            observed = rng.sample(values, k)
            scale = 10.0 ** rng.uniform(-6.0, 6.0)
            base = category_score_from_values(observed, values)
            scaled = category_score_from_values(
                [scale * v for v in observed], [scale * v for v in values]
            )
            assert abs(scaled - base) <= 1e-12
            assert abs(scaled - base) <= 1e-12 * base


def test_property_equal_likelihood_normalization():
    with criterion("property: equal-likelihood categories score exactly 1/n (1000 draws)"):
        rng = Random(1)
        constants = [1.0, 0.02, 0.001]
        for i in range(1000):
            n = rng.randint(1, 50)
            k = rng.randint(1, n)
            value = rng.choice(constants) if i % 2 == 0 else 10.0 ** rng.uniform(-6.0, 6.0)
            assert category_score_from_values([value] * k, [value] * n) == 1.0 / n


def test_property_empty_case_similarity_is_zero():
    with criterion("property: empty-case log similarity is exactly 0 (1000 diseases)"):
        checked = 0
        empty = PatientCase(sex=Sex.UNSPECIFIED, observations={})
        for seed in range(50):
            kb = generate_synthetic_kb(20, seed=seed)
            ranked = rank_all(kb, empty)
            for r in ranked:
                assert not r.excluded
                assert r.log_similarity == 0.0
            for disease in kb.diseases:
                assert similarity(kb, empty, disease) == 0.0
                checked += 1
        assert checked == 1000


def test_property_single_category_violations_rejected():
    with criterion("property: SINGLE-category overselection always rejected (1000 cases)"):
        kb = fixture_kb()
        singles = [c for c in kb.categories if c.selection is Selection.SINGLE]
        rng = Random(2)
        for _ in range(1000):
            category = rng.choice(singles)
            count = rng.randint(2, len(category.symptom_ids))
            chosen = rng.sample(list(category.symptom_ids), count)
            extra_multi = rng.random() < 0.5
            observations = {category.id: chosen}
            if extra_multi:
                observations["form"] = ["domeShaped"]
            document = {"sex": rng.choice(["male", "female", "unspecified"]), "observations": observations}
            with pytest.raises(CaseParseError) as exc_info:
                parse_case(json.dumps(document), kb)
            assert "MUTUAL_EXCLUSION" in {d.code for d in exc_info.value.diagnostics}


def test_mutation_canary(tmp_path, monkeypatch, capsys):
    with criterion("mutation canary: corrupting 0.001 -> 0.01 makes `dermrank check` exit 3"):
        kb_path = tmp_path / "canary_kb.json"
        assert cli.main(["generate", "--n", "20", "--seed", "1", "--out", str(kb_path)]) == 0
        monkeypatch.setattr("dermrank.kb.model.LIKELIHOOD_NO", 0.01)
        code = cli.main(["check", str(kb_path), "--cases", "100", "--seed", "7"])
        summary = json.loads(capsys.readouterr().out)
        assert code == 3
        assert summary["disagreements"] >= 1


def test_scale_and_performance():
    with criterion("scale: 620 diseases x 133 symptoms ranked in < 50 ms, no underflow"):
        kb = generate_synthetic_kb(620, full_scale_template(), seed=7)
        assert len(kb.diseases) == 620
        assert len(kb.symptom_ids()) == 133
        observations = {}
        for category in kb.categories:
            if category.selection is Selection.SINGLE:
                observations[category.id] = (category.symptom_ids[0],)
            else:
                observations[category.id] = category.symptom_ids[:3]
        case = PatientCase(sex=Sex.MALE, observations=observations)
        assert len(case.observations) == len(kb.categories)

        for _ in range(3):  # warm-up: builds the per-KB index
            ranked = rank_all(kb, case)
        timings = []
        for _ in range(10):
            started = time.perf_counter()
            ranked = rank_all(kb, case)
            timings.append(time.perf_counter() - started)
        median = statistics.median(timings)
        assert median < 0.050, f"median rank_all time {median * 1000:.1f} ms"
        for r in ranked:
            if not r.excluded:
                assert math.isfinite(r.log_similarity)
                assert math.isfinite(r.log_rank)


def test_cmd_rank_determinism(tmp_path, capsys):
    with criterion("determinism: cmd_rank byte-identical over 10 runs"):
        kb_path = tmp_path / "det_kb.json"
        assert cli.main(["generate", "--n", "50", "--seed", "3", "--out", str(kb_path)]) == 0
        capsys.readouterr()
        kb = parse_kb(kb_path.read_bytes())
        case = generate_synthetic_case(kb, "d7", noise=0.3, seed=11)
        case_path = tmp_path / "det_case.json"
        from dermrank.kb import dump_case

        case_path.write_text(dump_case(case), encoding="utf-8")
        outputs = set()
        for _ in range(10):
            assert cli.main(["rank", str(kb_path), str(case_path), "--show-scores"]) == 0
            outputs.add(capsys.readouterr().out)
        assert len(outputs) == 1


def test_retrieval_proxy():
    with criterion("retrieval proxy: noise-0 rank-1 >= 95/100, noise-0.2 top-5 >= 80/100"):
        kb = generate_synthetic_kb(100, full_scale_template(), seed=20260810)
        top1 = 0
        top5 = 0
        for seed in range(1, 101):
            target = kb.diseases[(seed - 1) % 100].id

            clean = generate_synthetic_case(kb, target, noise=0.0, seed=seed)
            by_similarity = sorted(
                (r for r in rank_all(kb, clean) if not r.excluded),
                key=lambda r: (-r.log_similarity, r.disease),
            )
            best = by_similarity[0].log_similarity
            leaders = [r.disease for r in by_similarity if abs(r.log_similarity - best) < 1e-12]
            if target in leaders:
                top1 += 1

            noisy = generate_synthetic_case(kb, target, noise=0.2, seed=seed)
            by_similarity = sorted(
                (r for r in rank_all(kb, noisy) if not r.excluded),
                key=lambda r: (-r.log_similarity, r.disease),
            )
            if target in [r.disease for r in by_similarity[:5]]:
                top5 += 1
        assert top1 >= 95, f"noise-0 rank-1 hits: {top1}/100"
        assert top5 >= 80, f"noise-0.2 top-5 hits: {top5}/100"
