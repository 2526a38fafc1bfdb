"""INI scenario parsing, built-in scenarios, CSV IO, and the CLI."""

import warnings

import numpy as np
import pytest

from cavqed import cli
from cavqed.config import (CSV_COLUMNS, load_scenario_text,
                           parse_initial_state)
from cavqed.dynamics import IntegratorConfig
from cavqed.errors import ConfigurationError
from cavqed.runner import (compare_runs, convergence_sweep, read_csv,
                           run_scenario)
from cavqed.scenarios import describe_scenarios, list_scenarios, load_scenario

MINIMAL = """
[scenario]
model = effective:puc,+,Intermediate
initial_state = a=fock:1 b=fock:0
cutoff_a = 4
cutoff_b = 4

[system]
delta_a = 8
delta_b = 8
lambda_a = 1
lambda_b = 1
Omega1 = 10

[integrator]
dt = 0.1
t_final = 2.0
samples = 3
"""

IP_SMALL = """
[scenario]
model = full-interaction-picture
initial_state = vacuum
cutoff_a = 3

[system]
delta_a = 30
delta1 = 0.1
lambda_a = 1
Omega1 = 10

[integrator]
dt = 1e-3
t_final = 0.05
samples = 2
"""

# AJC conditions hold but the drive hierarchy is shallow (ratio 3 << 10)
SHALLOW_AJC = """
[scenario]
model = ajc
initial_state = vacuum
cutoff_a = 3

[system]
delta_a = -20
delta2 = -120
lambda_a = 1
Omega1 = 60
Omega2 = 20

[integrator]
dt = 1e-2
t_final = 0.5
samples = 3
"""


def _write(tmp_path, text, name="scen.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_minimal_scenario_parses():
    cfg = load_scenario_text(MINIMAL, name_hint="mini")
    assert cfg.name == "mini"  # falls back to the hint
    assert cfg.model == "effective:puc,+,Intermediate"
    assert cfg.effective_selector() == ("puc", "+", "Intermediate")
    assert cfg.initial_state == {"a": 1, "b": 0}
    assert cfg.cutoff_a == cfg.cutoff_b == 4
    assert cfg.columns == CSV_COLUMNS
    assert np.allclose(cfg.integrator.grid(), [0.0, 1.0, 2.0])
    assert cfg.params.delta_a == 8
    assert cfg.chi is None


def test_system_keys_are_case_sensitive():
    bad = MINIMAL.replace("Omega1 = 10", "omega1 = 10")
    with pytest.raises(ConfigurationError, match="omega1"):
        load_scenario_text(bad)


def test_inline_comments_are_stripped():
    cfg = load_scenario_text(MINIMAL.replace(
        "cutoff_a = 4", "cutoff_a = 4  ; includes headroom"))
    assert cfg.cutoff_a == 4


@pytest.mark.parametrize("mutate,needle", [
    (lambda s: s + "\n[plotting]\nstyle = dark\n", "unknown section"),
    (lambda s: s.replace("model = effective:puc,+,Intermediate",
                         "model = heisenberg"), "unknown model"),
    (lambda s: s.replace("cutoff_a = 4", "cutoff_a = 1"), "cutoff_a"),
    (lambda s: s.replace("t_final = 2.0", "t_final = 0"), "t_final"),
    (lambda s: s.replace("samples = 3", "samples = 1"), "samples"),
    (lambda s: s.replace("dt = 0.1", "dt = fast"), "bad float"),
    (lambda s: s.replace("[integrator]\ndt", "[integrator]\nwarp = 9\ndt"),
     None),
])
def test_strict_parse_failures(mutate, needle):
    with pytest.raises(ConfigurationError) as exc:
        load_scenario_text(mutate(MINIMAL))
    if needle:
        assert needle in str(exc.value)


def test_missing_sections_rejected():
    with pytest.raises(ConfigurationError, match=r"\[scenario\]"):
        load_scenario_text("[integrator]\nt_final = 1\n")
    with pytest.raises(ConfigurationError, match=r"\[integrator\]"):
        load_scenario_text("[scenario]\nmodel = sss\ncutoff_a = 4\n")


def test_schedule_pairs_with_pulsed_model_only():
    pulsed = MINIMAL.replace("model = effective:puc,+,Intermediate",
                             "model = pulsed-jc-ajc")
    pulsed = pulsed.replace("initial_state = a=fock:1 b=fock:0",
                            "initial_state = vacuum")
    pulsed = pulsed.replace("Omega1 = 10", "Omega1 = 400\nOmega2 = 20\n"
                            "delta2 = -800")
    with pytest.raises(ConfigurationError, match="schedule"):
        load_scenario_text(pulsed)
    cfg = load_scenario_text(pulsed + "\n[schedule]\ntau = 1.5\nn_cycles = 2\n")
    assert cfg.schedule.tau == 1.5
    assert cfg.schedule.n_cycles == 2
    with pytest.raises(ConfigurationError, match="schedule"):
        load_scenario_text(MINIMAL + "\n[schedule]\ntau = 1\nn_cycles = 1\n")


def test_output_column_selection():
    cfg = load_scenario_text(MINIMAL + "\n[output]\ncolumns = time, n_a\n")
    assert cfg.columns == ("time", "n_a")
    with pytest.raises(ConfigurationError, match="unknown output columns"):
        load_scenario_text(MINIMAL + "\n[output]\ncolumns = time, energy\n")
    with pytest.raises(ConfigurationError, match="include 'time'"):
        load_scenario_text(MINIMAL + "\n[output]\ncolumns = n_a\n")


def test_initial_state_grammar():
    assert parse_initial_state("vacuum") == {}
    assert parse_initial_state(None) == {}
    parts = parse_initial_state("a=fock:2 b=0 atom=e")
    assert parts == {"a": 2, "b": 0, "atom": "e"}
    coh = parse_initial_state("a=coherent:1.5")
    assert coh["a"] == ("coherent", 1.5 + 0j)
    plus = parse_initial_state("atom=plus")["atom"]
    assert np.allclose(plus, [1 / np.sqrt(2), 1 / np.sqrt(2)])
    minus = parse_initial_state("atom=minus")["atom"]
    assert np.allclose(np.abs(minus), 1 / np.sqrt(2))
    for bad in ("a:1", "a=", "=1", "a=fock:x", "a=coherent:abc", "a=half",
                "a=1 a=2"):
        with pytest.raises(ConfigurationError):
            parse_initial_state(bad)


def test_initial_state_labels_checked_against_model():
    # no cutoff_b and a single-mode effective model: 'b' is not a factor
    text = MINIMAL.replace("model = effective:puc,+,Intermediate",
                           "model = effective:squeeze,down")
    text = text.replace("initial_state = a=fock:1 b=fock:0",
                        "initial_state = b=fock:1")
    text = text.replace("cutoff_b = 4", "")
    text = text.replace("delta_b = 8\n", "").replace("lambda_b = 1\n", "")
    text = text.replace("Omega1 = 10", "Omega1 = 400\nOmega2 = 20\n"
                        "delta2 = -800")
    with pytest.raises(ConfigurationError, match="unknown factor"):
        load_scenario_text(text)


def test_builtin_scenarios_all_load():
    names = list_scenarios()
    assert len(names) == 13
    assert names == sorted(names)
    for name in names:
        cfg = load_scenario(name)
        assert cfg.name == name
    described = dict(describe_scenarios())
    assert set(described) == set(names)
    assert all(described.values())
    with pytest.raises(ConfigurationError):
        load_scenario("does-not-exist")


def test_load_scenario_accepts_paths(tmp_path):
    path = _write(tmp_path, MINIMAL, "custom-run.ini")
    cfg = load_scenario(path)
    assert cfg.name == "custom-run"


def test_cli_list_scenarios(capsys):
    assert cli.main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    for name in list_scenarios():
        assert name in out


def test_cli_run_is_deterministic(tmp_path, capsys):
    out1 = str(tmp_path / "one.csv")
    out2 = str(tmp_path / "two.csv")
    assert cli.main(["run", "--config", "puc-intermediate",
                     "--out", out1]) == 0
    assert cli.main(["run", "--config", "puc-intermediate",
                     "--out", out2]) == 0
    bytes1 = open(out1, "rb").read()
    assert bytes1 == open(out2, "rb").read()
    stdout = capsys.readouterr().out
    assert "puc-intermediate" in stdout
    comments, cols = read_csv(out1)
    assert any(c.startswith("scenario:") for c in comments)
    assert any(c.startswith("model:") for c in comments)
    assert any(c.startswith("frame:") for c in comments)
    # field-only model: atomic column is NaN, and r needs a chi setting
    assert np.all(np.isnan(cols["pop_e"]))
    assert np.all(np.isnan(cols["r"]))
    assert np.all(np.isfinite(cols["n_a"]))


def test_cli_exit_codes(tmp_path, capsys):
    assert cli.main(["run", "--config", "/nope/missing.ini"]) == 1
    bad = _write(tmp_path, MINIMAL + "\n[output]\ncolumns = n_a\n")
    assert cli.main(["run", "--config", bad]) == 1
    capsys.readouterr()


def test_cli_regime_gate_and_force(tmp_path, capsys):
    path = _write(tmp_path, SHALLOW_AJC, "shallow.ini")
    assert cli.main(["run", "--config", path,
                     "--out", str(tmp_path / "x.csv")]) == 2
    assert "error:" in capsys.readouterr().err
    out = str(tmp_path / "forced.csv")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        assert cli.main(["run", "--config", path, "--force",
                         "--out", out]) == 0
    stdout = capsys.readouterr().out
    assert "forced past regime check" in stdout
    comments, _cols = read_csv(out)
    assert any("forced past regime check" in c for c in comments)
    assert any("violated margin" in c for c in comments)


def test_cli_run_numerical_failure(tmp_path, capsys):
    coarse = IP_SMALL.replace(
        "dt = 1e-3", "dt = 0.05").replace("t_final = 0.05", "t_final = 3.0")
    path = _write(tmp_path, coarse, "coarse.ini")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        code = cli.main(["run", "--config", path,
                         "--out", str(tmp_path / "y.csv")])
    assert code == 3
    assert "norm drift" in capsys.readouterr().err


def test_cli_compare(tmp_path, capsys):
    a = str(tmp_path / "a.csv")
    b = str(tmp_path / "b.csv")
    assert cli.main(["run", "--config", "puc-intermediate", "--out", a]) == 0
    assert cli.main(["run", "--config", "puc-intermediate", "--out", b]) == 0
    assert cli.main(["compare", "--a", a, "--b", b, "--column", "n_a",
                     "--tol", "1e-15"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out
    # a genuinely different run fails a tight tolerance with exit code 3
    c = str(tmp_path / "c.csv")
    assert cli.main(["run", "--config", "pdc-intermediate", "--out", c]) == 0
    assert cli.main(["compare", "--a", a, "--b", c, "--column", "n_a",
                     "--tol", "1e-9"]) == 3
    assert "FAIL" in capsys.readouterr().out
    assert cli.main(["compare", "--a", a, "--b", b,
                     "--column", "missing"]) == 1


def test_compare_report_fields(tmp_path):
    a = str(tmp_path / "a.csv")
    b = str(tmp_path / "b.csv")
    cli.main(["run", "--config", "puc-intermediate", "--out", a])
    cli.main(["run", "--config", "puc-intermediate", "--out", b])
    rep = compare_runs(a, b, "var_x_min")
    assert rep.max_abs == 0.0
    assert rep.max_rel == 0.0
    assert not rep.resampled
    assert not rep.restricted_to_r  # r column is NaN here
    assert rep.passed is None  # no tolerance requested
    assert "max abs deviation" in rep.text()


def test_compare_frame_gate(tmp_path, capsys):
    ip = _write(tmp_path, IP_SMALL, "ip.ini")
    a = str(tmp_path / "ip.csv")
    b = str(tmp_path / "eff.csv")
    assert cli.main(["run", "--config", ip, "--out", a]) == 0
    assert cli.main(["run", "--config", "puc-intermediate", "--out", b]) == 0
    capsys.readouterr()
    assert cli.main(["compare", "--a", a, "--b", b,
                     "--column", "theta_min"]) == 1
    assert "frame" in capsys.readouterr().err
    # frame-insensitive column is allowed across frames
    assert cli.main(["compare", "--a", a, "--b", b, "--column", "n_a"]) == 0


def test_sweep_converged_for_number_conserving_model():
    cfg = load_scenario("puc-intermediate")
    cfg = cfg.with_(integrator=IntegratorConfig(
        dt=0.1, t_grid=np.linspace(0.0, 10.56, 11)))
    rep = convergence_sweep(cfg, [3, 4, 5], tol=1e-12)
    assert rep.converged
    assert rep.failure is None
    assert max(rep.changes) < 1e-14  # one excitation never sees the cutoff
    assert "converged" in rep.text()


def test_sweep_detects_unconverged_squeezing():
    cfg = load_scenario("fig3-effective")
    rep = convergence_sweep(cfg, [10, 14], tol=1e-6)
    assert not rep.converged
    assert rep.changes[-1] > 1e-3


def test_sweep_input_validation():
    cfg = load_scenario("puc-intermediate")
    with pytest.raises(ConfigurationError):
        convergence_sweep(cfg, [4])
    with pytest.raises(ConfigurationError):
        convergence_sweep(cfg, [5, 3])


def test_cli_sweep_command(capsys):
    assert cli.main(["sweep", "--config", "puc-intermediate",
                     "--cutoffs", "3,4", "--tol", "1e-9"]) == 0
    assert "converged" in capsys.readouterr().out
    assert cli.main(["sweep", "--config", "puc-intermediate",
                     "--cutoffs", "3,x"]) == 1


def test_cli_derive_effective(capsys):
    assert cli.main(["derive-effective", "--config", "pdc-intermediate"]) == 0
    out = capsys.readouterr().out
    assert "closed form" in out
    assert "deviation" in out
    # two-drive configurations have no single closed-form target
    assert cli.main(["derive-effective", "--config", "sss"]) == 1


def test_read_csv_roundtrip_and_errors(tmp_path):
    cfg = load_scenario("puc-intermediate").with_(
        integrator=IntegratorConfig(dt=0.1, t_grid=np.linspace(0, 2.112, 3)))
    from cavqed.runner import write_csv
    result = run_scenario(cfg)
    path = str(tmp_path / "round.csv")
    write_csv(path, result)
    comments, cols = read_csv(path)
    for name in CSV_COLUMNS:
        got, want = cols[name], result.table[name]
        both_nan = np.isnan(got) & np.isnan(want)
        assert np.all(both_nan | (got == want))  # repr round-trip is exact
    with pytest.raises(ConfigurationError, match="ragged"):
        bad = tmp_path / "ragged.csv"
        bad.write_text("time,n_a\n0.0,1.0\n0.1\n")
        read_csv(str(bad))
    with pytest.raises(ConfigurationError, match="no data"):
        empty = tmp_path / "empty.csv"
        empty.write_text("# only comments\n")
        read_csv(str(empty))
    with pytest.raises(ConfigurationError):
        read_csv(str(tmp_path / "absent.csv"))
