import json
import math

import numpy as np
import pytest

import jacobi_lt.experiments as ex
from jacobi_lt.checks import rank_one_lambda
from jacobi_lt.experiments import (
    CoefficientModel,
    ExperimentConfig,
    ReportFormatError,
    ReportVersionError,
    aggregate,
    dumps_report,
    eigenvalue_csv,
    generate_ensemble,
    load_report,
    run_experiment,
    save_report,
)
from jacobi_lt.functionals import empirical_constant
from jacobi_lt.linalg import eigenvalues
from jacobi_lt.operator import PerturbationSpec, truncate
from jacobi_lt.resolvent import dist_to_band


def make_config(**overrides):
    base = dict(
        seed=7,
        trials=3,
        support_width=3,
        magnitude=1.0,
        coefficient_model="complex-general",
        p_grid=[1.0, 2.0],
        tau_grid=[0.5],
        truncation_size=500,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


@pytest.fixture(scope="module")
def report():
    return run_experiment(make_config())


class TestConfig:
    @pytest.mark.parametrize(
        "overrides",
        [
            dict(trials=0),
            dict(trials=-2),
            dict(seed=-1),
            dict(seed=2**64),
            dict(support_width=0),
            dict(magnitude=-0.5),
            dict(magnitude=math.inf),
            dict(p_grid=[]),
            dict(tau_grid=[]),
            dict(p_grid=[0.5]),
            dict(tau_grid=[1.0]),
            dict(band_gap=0.0),
            dict(band_gap=1.0),
            dict(truncation_size=49),
            dict(coefficient_model="hermitian"),
            dict(theta=math.pi / 2),
        ],
    )
    def test_rejected(self, overrides):
        with pytest.raises(ValueError):
            make_config(**overrides)

    def test_json_round_trip(self):
        cfg = make_config(coefficient_model="diagonal-only", exploratory_tau0=True)
        assert ExperimentConfig.from_json(json.loads(json.dumps(cfg.to_json()))) == cfg

    def test_unknown_keys(self):
        obj = make_config().to_json()
        obj["colour"] = "blue"
        with pytest.raises(ValueError):
            ExperimentConfig.from_json(obj)

    def test_functional_specs(self):
        labels = [s.label for s in make_config(p_grid=[1.0, 2.0], exploratory_tau0=True).functional_specs()]
        assert "l1,p=1,tau=0.5" in labels and "main,p=2,tau=0.5" in labels
        assert "main,p=2,tau=0" in labels and "l1,p=1,tau=0" in labels
        assert not any(lab.startswith("hs") for lab in labels)
        sa = make_config(coefficient_model="selfadjoint-real").functional_specs()
        assert sum(s.kind.value == "hs" for s in sa) == 2


class TestEnsemble:
    def test_deterministic(self):
        cfg = make_config(trials=6)
        assert generate_ensemble(cfg) == generate_ensemble(cfg)
        other = generate_ensemble(make_config(trials=6, seed=8))
        assert generate_ensemble(cfg) != other

    def test_prefix_stable(self):
        # trial i depends on (seed, i) only
        assert generate_ensemble(make_config(trials=2)) == generate_ensemble(make_config(trials=5))[:2]

    @pytest.mark.parametrize("model", list(CoefficientModel))
    def test_magnitude_bound(self, model):
        for pert in generate_ensemble(make_config(trials=20, coefficient_model=model, magnitude=0.7)):
            for arr in (pert.da, pert.db, pert.dc):
                assert np.all(np.abs(arr) <= 0.7 + 1e-15)

    def test_selfadjoint_real(self):
        cfg = make_config(trials=10, coefficient_model="selfadjoint-real", magnitude=2.0)
        for pert in generate_ensemble(cfg):
            assert np.all(pert.da == pert.dc)
            assert np.all(np.isreal(pert.db)) and np.all(np.isreal(pert.da))
            assert np.all(1 + pert.da.real >= 0.1)
            eigs = eigenvalues(truncate(pert, -40, 40))
            assert np.max(np.abs(eigs.imag)) <= 1e-8

    def test_diagonal_only(self):
        for pert in generate_ensemble(make_config(trials=5, coefficient_model="diagonal-only")):
            assert not np.any(pert.da) and not np.any(pert.dc)


class TestRun:
    def test_record_count_and_ratios(self, report):
        assert len(report.records) == report.config.trials
        assert [r.index for r in report.records] == list(range(report.config.trials))
        assert report.failures == 0
        for rec in report.records:
            for fv in rec.functionals:
                assert fv.value >= 0 and (fv.ratio is None or fv.ratio >= 0)
                assert fv.ratio == pytest.approx(fv.value / fv.norm_pp, rel=1e-15)
            for sp in rec.spectrum:
                assert sp.dist >= report.config.band_gap
                assert sp.dist**2 <= sp.disc * (1 + 1e-12)

    def test_suites_pass(self, report):
        assert set(report.suites) >= {"duality", "domination", "norm_equivalence", "u_bound"}
        assert all(report.suites.values()), report.suites

    def test_zero_magnitude(self):
        rep = run_experiment(make_config(trials=1, magnitude=0.0))
        (rec,) = rep.records
        assert rec.ok and rec.spectrum == []
        assert all(fv.value == 0.0 and fv.ratio is None for fv in rec.functionals)
        assert all(a.constant is None and a.count == 0 for a in rep.aggregates)

    def test_rank_one_injection(self):
        cfg = make_config(trials=1, support_width=1, coefficient_model="diagonal-only")
        rep = run_experiment(cfg, ensemble=[PerturbationSpec.from_sites(b={0: 1.0})])
        (sp,) = rep.records[0].spectrum
        assert abs(sp.lam - 2.2360680) <= 5e-8 and sp.multiplicity == 1

    def test_rank_one_fixed_seed(self):
        cfg = make_config(seed=11, trials=8, support_width=1, coefficient_model="diagonal-only")
        rep = run_experiment(cfg)
        seen = 0
        for rec in rep.records:
            lam = rank_one_lambda(complex(rec.perturbation.db[0]))
            if dist_to_band(lam) >= 1.2 * cfg.band_gap:
                (sp,) = rec.spectrum
                assert abs(sp.lam - lam) <= 1e-8
                seen += 1
        assert seen >= 1

    def test_selfadjoint_report(self):
        rep = run_experiment(make_config(coefficient_model="selfadjoint-real", magnitude=1.5))
        assert rep.suites["real_spectrum"] and rep.suites["selfadjoint_rewrite"]
        for rec in rep.records:
            assert all(abs(sp.lam.imag) <= 1e-8 for sp in rec.spectrum)

    def test_threads_do_not_change_bytes(self, report):
        cfg = report.config
        again = run_experiment(cfg, threads=4)
        assert dumps_report(again) == dumps_report(report)
        assert eigenvalue_csv(again.records) == eigenvalue_csv(report.records)

    def test_thread_and_ensemble_errors(self):
        with pytest.raises(ValueError):
            run_experiment(make_config(), threads=0)
        with pytest.raises(ValueError):
            run_experiment(make_config(), ensemble=[PerturbationSpec.zero()])

    def test_trial_isolation(self, monkeypatch):
        cfg = make_config(trials=4)
        poisoned = generate_ensemble(cfg)[2]
        real = ex.discrete_spectrum

        def flaky(pert, *args, **kwargs):
            if pert == poisoned:
                raise RuntimeError("eigen solver iteration cap")
            return real(pert, *args, **kwargs)

        monkeypatch.setattr(ex, "discrete_spectrum", flaky)
        rep = run_experiment(cfg, threads=2)
        assert rep.failures == 1
        assert [r.ok for r in rep.records] == [True, True, False, True]
        assert "iteration cap" in rep.records[2].error
        assert len(rep.records[2].digest) == 64 and rep.records[2].functionals == []

    def test_aggregation_recomputed(self, report):
        aggs, suites = aggregate(report.records)
        assert aggs == report.aggregates and suites == report.suites
        for agg in report.aggregates:
            pairs, ids = [], []
            for rec in report.records:
                for fv in rec.functionals:
                    if (fv.kind, fv.p, fv.tau, fv.theta, fv.exploratory) == (agg.kind, agg.p, agg.tau, agg.theta, agg.exploratory):
                        pairs.append((fv.value, fv.norm_pp))
                        ids.append(rec.index)
            est = empirical_constant(pairs, ids)
            assert agg.constant == est.value and agg.argmax_trial == est.argmax
            assert agg.min_ratio == min(v / n for v, n in pairs) and agg.count == len(pairs)


class TestPersistence:
    def test_round_trip(self, report, tmp_path):
        path = tmp_path / "report.json"
        save_report(report, path)
        loaded = load_report(path)
        assert loaded == report
        assert dumps_report(loaded) == path.read_text()

    def test_complex_pairs(self, report):
        obj = json.loads(dumps_report(report))
        for rec in obj["records"]:
            for sp in rec["spectrum"]:
                assert isinstance(sp["lam"], list) and len(sp["lam"]) == 2
        assert "timings" not in obj

    def test_truncated(self, report, tmp_path):
        text = dumps_report(report)
        path = tmp_path / "cut.json"
        path.write_text(text[: len(text) // 2])
        with pytest.raises(ReportFormatError):
            load_report(path)

    def test_missing_records(self, report, tmp_path):
        obj = json.loads(dumps_report(report))
        obj["records"] = obj["records"][:-1]
        path = tmp_path / "short.json"
        path.write_text(json.dumps(obj))
        with pytest.raises(ReportFormatError):
            load_report(path)

    def test_malformed_record(self, report, tmp_path):
        obj = json.loads(dumps_report(report))
        del obj["records"][0]["digest"]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(obj))
        with pytest.raises(ReportFormatError):
            load_report(path)

    def test_version(self, report, tmp_path):
        obj = json.loads(dumps_report(report))
        obj["version"] = 99
        path = tmp_path / "v99.json"
        path.write_text(json.dumps(obj))
        with pytest.raises(ReportVersionError):
            load_report(path)

    def test_not_a_report(self, tmp_path):
        path = tmp_path / "other.json"
        path.write_text("[1, 2, 3]")
        with pytest.raises(ReportFormatError):
            load_report(path)

    def test_csv(self, report):
        lines = eigenvalue_csv(report.records).splitlines()
        assert lines[0] == ",".join(ex.CSV_COLUMNS)
        assert len(lines) - 1 == sum(len(r.spectrum) for r in report.records)
