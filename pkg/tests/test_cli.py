"""Command line interface: schema, dispatch, exit codes, manifests.

Exit-code contract: 0 success, 2 config error, 4 infeasible; numerical
failures map to 3 through the same class-based switch (unit-tested
directly, since a deterministic mid-run numerical failure is hard to
stage cheaply). The validate/run agreement tests catch schema drift:
whatever validate accepts must run, and whatever run rejects as config
must already fail validation.
"""
import math
import os

import numpy as np
import pytest

from driftlab.cli import (
    EXIT_CONFIG,
    EXIT_INFEASIBLE,
    EXIT_NUMERICAL,
    EXIT_OK,
    MANIFEST_NAME,
    apply_overrides,
    config_hash,
    exit_code_for,
    flatten_config,
    main,
    resolve_config,
)
from driftlab.errors import (
    AmbiguousThresholdError,
    CensoringError,
    ConfigError,
    ConfinementError,
    DegenerateInstanceError,
    DivergenceError,
    StabilityError,
)
from driftlab.io_utils import sha256_file

RING = """
seed = 7

[markov]
ring = 3
forward = 2.0
backward = 1.0
"""

BREAKDOWN = """
seed = 3

[breakdown]
sizes = [16, 32]
delta = 0.5
n_trials = 200
"""

SELFREF = """
seed = 5

[selfref]
readout = [[1.0]]
kappas = [0.05, 0.2, 0.8]
rel_tol = 0.05
max_points = 1024

[selfref.manifold]
kind = "box"
lo = [-6.0]
hi = [6.0]

[selfref.sim]
dt = 1e-3
noise = 0.5
n_steps = 20000
n_chains = 4

[[selfref.substrate]]
type = "linear"
matrix = [[-1.0]]
"""

SYNERGY = """
seed = 42

[synergy]
n_boot = 200

[synergy.manifold]
kind = "box"
lo = [-2.0]
hi = [2.0]

[synergy.sim]
dt = 2e-3
noise = 0.1
n_steps = 20000
n_chains = 4

[[synergy.terms]]
type = "poly_axis"
coeffs = [[0.0, 0.5, 0.0, 0.0]]

[[synergy.wells]]
center = [-0.9]
width = 0.15
depth = 0.1

[[synergy.wells]]
center = [0.9]
width = 0.15
depth = 0.1

[synergy.target]
kind = "box"
lo = [-0.4]
hi = [0.4]
"""


@pytest.fixture
def config_file(tmp_path):
    def write(text, name="exp.toml"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write


def run_cli(*argv):
    return main(list(argv))


class TestVersion:
    def test_version_prints_tool_and_number(self, capsys):
        assert run_cli("version") == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("driftlab ")
        assert out.split()[1][0].isdigit()


class TestExitCodes:
    def test_config_errors_map_to_2(self):
        for exc in (ConfigError("x"), StabilityError("x"),
                    ConfinementError("x")):
            assert exit_code_for(exc) == EXIT_CONFIG

    def test_numerical_errors_map_to_3(self):
        for exc in (DivergenceError("x"), AmbiguousThresholdError("x")):
            assert exit_code_for(exc) == EXIT_NUMERICAL

    def test_infeasible_errors_map_to_4(self):
        for exc in (CensoringError("x"), DegenerateInstanceError("x")):
            assert exit_code_for(exc) == EXIT_INFEASIBLE


class TestValidate:
    def test_valid_config_echoes_resolution(self, config_file, capsys):
        path = config_file(RING)
        assert run_cli("validate", "--config", path) == EXIT_OK
        out = capsys.readouterr().out
        assert out.splitlines()[0] == "OK"
        assert "markov.ring = 3" in out
        assert "seed = 7" in out

    def test_missing_seed_warns_but_passes(self, config_file, capsys):
        path = config_file("[markov]\nring = 4\n")
        assert run_cli("validate", "--config", path) == EXIT_OK
        captured = capsys.readouterr()
        assert "seed missing; defaulting to 0" in captured.out
        assert "OK" in captured.out

    def test_two_sections_rejected_naming_both(self, config_file, capsys):
        path = config_file(
            "[markov]\nring = 3\n\n[breakdown]\nsizes = [16]\ndelta = 0.5\n"
        )
        assert run_cli("validate", "--config", path) == EXIT_CONFIG
        err = capsys.readouterr().err
        assert "markov" in err and "breakdown" in err
        assert "exactly one" in err

    def test_no_section_rejected(self, config_file, capsys):
        path = config_file("seed = 1\n")
        assert run_cli("validate", "--config", path) == EXIT_CONFIG
        assert "no experiment section" in capsys.readouterr().err

    def test_unknown_top_level_key(self, config_file, capsys):
        path = config_file(RING + "\nbudget = 3\n")
        assert run_cli("validate", "--config", path) == EXIT_CONFIG
        assert "budget" in capsys.readouterr().err

    def test_seed_must_be_u64(self, config_file, capsys):
        for bad in ("seed = -1", "seed = 18446744073709551616",
                    'seed = "x"'):
            path = config_file(f"{bad}\n\n[markov]\nring = 3\n")
            assert run_cli("validate", "--config", path) == EXIT_CONFIG
        assert "seed" in capsys.readouterr().err

    def test_simplex_with_box_bounds_names_mismatch(self, config_file,
                                                    capsys):
        path = config_file("""
seed = 1

[selfref]
readout = [[1.0, 0.0, 0.0]]
kappas = [0.1, 0.2]

[selfref.manifold]
kind = "simplex"
dim = 3
lo = [0.0, 0.0, 0.0]
hi = [1.0, 1.0, 1.0]

[selfref.sim]
dt = 1e-4
noise = 0.01
n_steps = 1000

[[selfref.substrate]]
type = "replicator"
payoff = [[0.0, 1.0, -1.0], [-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]]
""")
        assert run_cli("validate", "--config", path) == EXIT_CONFIG
        err = capsys.readouterr().err
        assert "simplex" in err and "box bounds" in err

    def test_breakdown_delta_below_bound(self, config_file, capsys):
        path = config_file(BREAKDOWN)
        assert run_cli(
            "validate", "--config", path, "--set", "breakdown.delta=0.01"
        ) == EXIT_CONFIG
        err = capsys.readouterr().err
        assert "below the minimum divergence 0.05" in err

    def test_breakdown_delta_above_alphabet_capacity(self, config_file,
                                                     capsys):
        path = config_file(BREAKDOWN)
        assert run_cli(
            "validate", "--config", path, "--set", "breakdown.delta=2.9"
        ) == EXIT_CONFIG
        assert "ln(min N)" in capsys.readouterr().err

    def test_unreadable_file(self, capsys, tmp_path):
        assert run_cli(
            "validate", "--config", str(tmp_path / "absent.toml")
        ) == EXIT_CONFIG
        assert "cannot read config" in capsys.readouterr().err

    def test_unparseable_file(self, config_file, capsys):
        path = config_file("[markov\nring = ")
        assert run_cli("validate", "--config", path) == EXIT_CONFIG
        assert "does not parse" in capsys.readouterr().err

    def test_validate_has_no_side_effects(self, config_file, tmp_path):
        path = config_file(RING)
        out = tmp_path / "never"
        assert run_cli(
            "validate", "--config", path, "--out", str(out)
        ) == EXIT_OK
        assert not out.exists()

    def test_unknown_term_type_lists_options(self, config_file, capsys):
        path = config_file(SELFREF.replace('type = "linear"',
                                           'type = "quadratic"'))
        assert run_cli("validate", "--config", path) == EXIT_CONFIG
        err = capsys.readouterr().err
        assert "quadratic" in err and "poly_axis" in err

    def test_kappas_need_two_increasing_values(self, config_file, capsys):
        path = config_file(SELFREF.replace("kappas = [0.05, 0.2, 0.8]",
                                           "kappas = [0.05]"))
        assert run_cli("validate", "--config", path) == EXIT_CONFIG
        assert "at least 2" in capsys.readouterr().err

    def test_synergy_needs_two_wells(self, config_file, capsys):
        cut = SYNERGY.replace("""
[[synergy.wells]]
center = [0.9]
width = 0.15
depth = 0.1
""", "")
        path = config_file(cut)
        assert run_cli("validate", "--config", path) == EXIT_CONFIG
        assert "exactly 2 wells" in capsys.readouterr().err

    def test_synergy_overlapping_wells_rejected(self, config_file, capsys):
        path = config_file(SYNERGY.replace("center = [-0.9]",
                                           "center = [0.8]"))
        assert run_cli("validate", "--config", path) == EXIT_CONFIG
        assert "intersect" in capsys.readouterr().err

    def test_synergy_bad_metric(self, config_file, capsys):
        path = config_file(SYNERGY + '\nmetric = "area"\n')
        code = run_cli("validate", "--config", path)
        assert code == EXIT_CONFIG
        assert "metric" in capsys.readouterr().err

    def test_sweep_needs_enough_increasing_values(self, config_file, capsys):
        path = config_file(
            SYNERGY + "\n[synergy.sweep]\nvalues = [0.0, 0.1, 0.2]\n"
        )
        assert run_cli("validate", "--config", path) == EXIT_CONFIG
        assert "at least 7" in capsys.readouterr().err

    def test_unstable_dynamics_rejected_before_running(self, config_file,
                                                       capsys):
        # dt far too large for the drift scale: the stability pre-check
        # must fire at validation, not midway through a run
        path = config_file(SELFREF.replace("dt = 1e-3", "dt = 2.0"))
        assert run_cli("validate", "--config", path) == EXIT_CONFIG
        assert "dt" in capsys.readouterr().err


class TestOverrides:
    def test_values_parse_as_toml_literals(self):
        raw = apply_overrides({}, [
            "a.b=3", "a.c=2.5", "a.d=true", "a.e=[1, 2]", "a.f=plain",
        ])
        assert raw == {"a": {"b": 3, "c": 2.5, "d": True,
                             "e": [1, 2], "f": "plain"}}

    def test_missing_equals_rejected(self):
        with pytest.raises(ConfigError, match="key=value"):
            apply_overrides({}, ["novalue"])

    def test_descending_into_scalar_rejected(self):
        with pytest.raises(ConfigError, match="non-table"):
            apply_overrides({"a": 3}, ["a.b=1"])

    def test_original_tree_untouched(self):
        raw = {"markov": {"ring": 3}}
        out = apply_overrides(raw, ["markov.ring=5"])
        assert raw["markov"]["ring"] == 3
        assert out["markov"]["ring"] == 5

    def test_value_may_contain_equals(self):
        out = apply_overrides({}, ["a=x=y"])
        assert out["a"] == "x=y"


class TestResolvedForm:
    def test_flatten_orders_and_indexes(self):
        lines = flatten_config({
            "b": {"terms": [{"type": "linear"}, {"type": "solenoid"}]},
            "a": 1.5,
        })
        assert lines == [
            ("a", "1.5"),
            ("b.terms.0.type", "linear"),
            ("b.terms.1.type", "solenoid"),
        ]

    def test_scalar_lists_stay_inline(self):
        lines = flatten_config({"lo": [-2.0, -2.0]})
        assert lines == [("lo", "[-2.0, -2.0]")]

    def test_hash_covers_seed_and_section_only(self, config_file):
        def cfg_of(text):
            import tomli

            cfg, errors, _ = resolve_config(tomli.loads(text))
            assert not errors
            return cfg

        base = cfg_of(RING)
        assert config_hash(base) == config_hash(cfg_of(RING + "\nverbosity = 0\n"))
        assert config_hash(base) != config_hash(cfg_of(RING.replace("seed = 7", "seed = 8")))
        assert config_hash(base) != config_hash(cfg_of(RING.replace("ring = 3", "ring = 4")))


class TestRunMarkov:
    @pytest.fixture
    def ring_run(self, config_file, tmp_path):
        path = config_file(RING)
        out = tmp_path / "out"
        code = run_cli("run", "--config", path, "--out", str(out))
        return code, out

    def test_exit_zero_and_files(self, ring_run):
        code, out = ring_run
        assert code == EXIT_OK
        assert sorted(p.name for p in out.iterdir()) == [
            "cycles.csv", MANIFEST_NAME, "markov_summary.txt",
        ]

    def test_driven_ring_entropy_is_ln2(self, ring_run):
        _, out = ring_run
        text = (out / "markov_summary.txt").read_text()
        values = dict(
            line.split(" = ") for line in text.strip().splitlines()
        )
        assert float(values["sigma_edge"]) == pytest.approx(math.log(2.0),
                                                            abs=1e-10)
        assert float(values["sigma_cycle"]) == pytest.approx(math.log(2.0),
                                                             abs=1e-10)
        assert values["balanced"] == "false"

    def test_cycle_affinity_row(self, ring_run):
        _, out = ring_run
        lines = (out / "cycles.csv").read_text().splitlines()
        assert lines[0] == (
            "cycle_id,chord_i,chord_j,affinity,current,contribution"
        )
        assert len(lines) == 2
        affinity = float(lines[1].split(",")[3])
        assert abs(abs(affinity) - 3 * math.log(2.0)) < 1e-10

    def test_manifest_checksums_match_files(self, ring_run):
        _, out = ring_run
        entries = dict(
            line.split(" = ")
            for line in (out / MANIFEST_NAME).read_text().splitlines()
        )
        assert entries["tool_version"] == "0.1.0"
        assert entries["n_files"] == "2"
        for key, value in entries.items():
            if key.startswith("sha256:"):
                name = key.split(":", 1)[1]
                assert sha256_file(str(out / name)) == value
        assert entries["config.markov.ring"] == "3"
        assert entries["config.seed"] == "7"

    def test_repeat_runs_are_byte_identical(self, config_file, tmp_path):
        path = config_file(RING)
        a, b = tmp_path / "a", tmp_path / "b"
        assert run_cli("run", "--config", path, "--out", str(a)) == EXIT_OK
        assert run_cli("run", "--config", path, "--out", str(b)) == EXIT_OK
        assert (a / "cycles.csv").read_bytes() == (b / "cycles.csv").read_bytes()
        assert (a / "markov_summary.txt").read_bytes() == (
            b / "markov_summary.txt"
        ).read_bytes()

    def test_set_flag_changes_the_experiment(self, config_file, tmp_path):
        path = config_file(RING)
        out = tmp_path / "o4"
        assert run_cli(
            "run", "--config", path, "--set", "markov.forward=4.0",
            "--out", str(out),
        ) == EXIT_OK
        text = (out / "markov_summary.txt").read_text()
        sigma = float(text.split("sigma_edge = ")[1].splitlines()[0])
        assert sigma == pytest.approx(math.log(4.0), abs=1e-10)

    def test_edge_list_source_relative_to_config(self, tmp_path, capsys):
        (tmp_path / "net.edges").write_text(
            "0 1 2.0\n1 0 1.0\n1 2 2.0\n2 1 1.0\n2 0 2.0\n0 2 1.0\n"
        )
        cfg = tmp_path / "edges.toml"
        cfg.write_text('seed = 1\n\n[markov]\nedges = "net.edges"\n')
        out = tmp_path / "out"
        old = os.getcwd()
        os.chdir("/")  # relative paths must resolve against the config
        try:
            assert run_cli(
                "run", "--config", str(cfg), "--out", str(out)
            ) == EXIT_OK
        finally:
            os.chdir(old)
        text = (out / "markov_summary.txt").read_text()
        sigma = float(text.split("sigma_edge = ")[1].splitlines()[0])
        assert sigma == pytest.approx(math.log(2.0), abs=1e-10)

    def test_two_network_sources_rejected(self, config_file, capsys):
        path = config_file(RING + "\nrates = [[0.0, 1.0], [1.0, 0.0]]\n")
        assert run_cli("validate", "--config", path) == EXIT_CONFIG
        assert "exactly one network source" in capsys.readouterr().err


class TestRunExperiments:
    def test_selfref_threshold_near_analytic(self, config_file, tmp_path,
                                             capsys):
        path = config_file(SELFREF)
        out = tmp_path / "sr"
        assert run_cli("run", "--config", path, "--out", str(out)) == EXIT_OK
        summary = (out / "coupling_summary.txt").read_text()
        threshold = float(summary.split("threshold = ")[1].splitlines()[0])
        # identity readout on a 1-d OU: efficacy kappa/(1+kappa) crosses
        # 0.1 at kappa = 1/9
        assert threshold == pytest.approx(1.0 / 9.0, rel=0.15)
        lines = (out / "coupling.csv").read_text().splitlines()
        assert lines[0] == "kappa,mi,fidelity,efficacy,near_deterministic"
        assert len(lines) >= 4

    def test_field_emits_grid_and_summary(self, config_file, tmp_path):
        path = config_file("""
seed = 2

[field]
cells_per_axis = 12

[field.manifold]
kind = "box"
lo = [-3.0, -3.0]
hi = [3.0, 3.0]

[field.sim]
dt = 1e-3
noise = 0.5
n_steps = 20000
n_chains = 4

[[field.terms]]
type = "linear"
matrix = [[-1.0, 0.0], [0.0, -1.0]]

[[field.terms]]
type = "solenoid"
omega = 1.0
center = [0.0, 0.0]
""")
        out = tmp_path / "f"
        assert run_cli("run", "--config", path, "--out", str(out)) == EXIT_OK
        header = (out / "field.csv").read_text().splitlines()[0]
        assert header.startswith("cell_index,center_0,center_1,p_hat,phi")
        summary = (out / "field_summary.txt").read_text()
        for key in ("sigma_bar", "noise_floor", "noncollinear_fraction"):
            assert f"{key} = " in summary

    def test_synergy_near_additive_and_no_curve_without_sweep(
        self, config_file, tmp_path
    ):
        path = config_file(SYNERGY)
        out = tmp_path / "sy"
        assert run_cli("run", "--config", path, "--out", str(out)) == EXIT_OK
        files = sorted(p.name for p in out.iterdir())
        assert "yield_curve.csv" not in files
        summary = (out / "synergy_summary.txt").read_text()
        s = float(summary.split("superlinearity = ")[1].splitlines()[0])
        assert 0.8 < s < 1.2

    def test_synergy_sweep_emits_curve(self, config_file, tmp_path):
        sweep = SYNERGY + """
[synergy.sweep]
values = [-0.8, -0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6, 0.8]
"""
        path = config_file(sweep)
        out = tmp_path / "sw"
        assert run_cli(
            "run", "--config", path, "--out", str(out), "--workers", "4"
        ) == EXIT_OK
        lines = (out / "yield_curve.csv").read_text().splitlines()
        assert len(lines) == 10
        curve = (out / "curve_summary.txt").read_text()
        assert "mode_count = 1" in curve
        assert "unimodal = true" in curve

    def test_scaling_runs_and_reports_verdicts(self, config_file, tmp_path):
        path = config_file("""
seed = 11

[scaling]
n_trials = 200
rel_tol = 0.05
max_points = 512

[scaling.sim]
dt = 1e-3
noise = 0.5
n_steps = 4000
n_chains = 4
""")
        out = tmp_path / "sc"
        assert run_cli(
            "run", "--config", path, "--out", str(out), "--workers", "5"
        ) == EXIT_OK
        summary = (out / "scaling_summary.txt").read_text()
        assert "verdict_b = pass" in summary
        lines = (out / "scaling.csv").read_text().splitlines()
        assert len(lines) == 6

    def test_infeasible_scan_exits_4(self, config_file, tmp_path, capsys):
        path = config_file("""
seed = 11

[scaling]
n_trials = 200
rel_tol = 0.05
max_points = 512
kappas = [1e-6, 3e-6]

[scaling.sim]
dt = 1e-3
noise = 0.5
n_steps = 2000
n_chains = 4
""")
        out = tmp_path / "cens"
        code = run_cli(
            "run", "--config", path, "--out", str(out), "--workers", "5"
        )
        assert code == EXIT_INFEASIBLE
        err = capsys.readouterr().err
        assert "CensoringError" in err
        assert not (out / MANIFEST_NAME).exists()

    def test_breakdown_workers_match_sequential(self, config_file, tmp_path):
        path = config_file(BREAKDOWN)
        seq, par = tmp_path / "seq", tmp_path / "par"
        assert run_cli(
            "run", "--config", path, "--out", str(seq), "--single-thread",
            "--workers", "8",
        ) == EXIT_OK
        assert run_cli(
            "run", "--config", path, "--out", str(par), "--workers", "2"
        ) == EXIT_OK
        assert (seq / "breakdown.csv").read_bytes() == (
            par / "breakdown.csv"
        ).read_bytes()

    def test_seed_flag_overrides_config(self, config_file, tmp_path):
        path = config_file(BREAKDOWN)
        a, b = tmp_path / "a", tmp_path / "b"
        assert run_cli(
            "run", "--config", path, "--out", str(a), "--seed", "9"
        ) == EXIT_OK
        assert run_cli(
            "run", "--config", path, "--out", str(b)
        ) == EXIT_OK
        man = (a / MANIFEST_NAME).read_text()
        assert "config.seed = 9" in man
        assert (a / "breakdown.csv").read_text() != (
            b / "breakdown.csv"
        ).read_text()


class TestOutputResolution:
    def test_env_var_default_root(self, config_file, tmp_path, monkeypatch):
        monkeypatch.setenv("DRIFTLAB_OUT", str(tmp_path / "root"))
        path = config_file(RING, name="ringexp.toml")
        assert run_cli("run", "--config", path) == EXIT_OK
        assert (tmp_path / "root" / "ringexp" / "cycles.csv").exists()

    def test_out_flag_beats_config_out(self, config_file, tmp_path):
        cfg = RING + f'\nout = "{tmp_path / "from_config"}"\n'
        path = config_file(cfg)
        chosen = tmp_path / "from_flag"
        assert run_cli(
            "run", "--config", path, "--out", str(chosen)
        ) == EXIT_OK
        assert chosen.exists()
        assert not (tmp_path / "from_config").exists()

    def test_config_out_relative_to_config_dir(self, config_file, tmp_path):
        path = config_file(RING + '\nout = "nested/run"\n')
        old = os.getcwd()
        os.chdir("/")
        try:
            assert run_cli("run", "--config", path) == EXIT_OK
        finally:
            os.chdir(old)
        assert (tmp_path / "nested" / "run" / "cycles.csv").exists()


class TestValidateRunAgreement:
    CASES = [
        (RING, True),
        (RING.replace("ring = 3", "ring = 12"), True),
        (RING.replace("ring = 3", "ring = 1"), False),
        (RING.replace("forward = 2.0", "forward = -1.0"), False),
        (RING.replace("seed = 7", "seed = -2"), False),
        (RING + "\nstray = 1\n", False),
        (RING + '\nrates = [[0.0, 1.0], [1.0, 0.0]]\n', False),
        ("seed = 1\n", False),
        (BREAKDOWN, True),
        (BREAKDOWN.replace("delta = 0.5", "delta = 0.001"), False),
        (BREAKDOWN.replace("n_trials = 200", "n_trials = 10"), False),
        (BREAKDOWN.replace("sizes = [16, 32]", "sizes = [16.5]"), False),
    ]

    @pytest.mark.parametrize("text,expected_ok", CASES)
    def test_verdicts_agree(self, text, expected_ok, config_file, tmp_path):
        path = config_file(text)
        out = tmp_path / "agree"
        code_val = run_cli("validate", "--config", path, "--out", str(out))
        code_run = run_cli("run", "--config", path, "--out", str(out))
        assert (code_val == EXIT_OK) == (code_run == EXIT_OK) == expected_ok
        if not expected_ok:
            assert code_val == EXIT_CONFIG
            assert code_run == EXIT_CONFIG
            assert not out.exists()
