import json
from fractions import Fraction

from realstab.cli import main
from realstab.fileio import (
    SystemDocument,
    doc_iop,
    doc_sls_of,
    doc_youla,
    dumps_canonical,
    load_report,
    load_system,
    perturbation_to_json,
    save_system,
)
from realstab.iop import iop_verify
from realstab.matrix import StateSpace, TransferMatrix
from realstab.realization import AdditivePerturbation
from realstab.sls import sls_of_verify

from conftest import HALF, Z, rf


def write_fig4(tmp_path, name="loop.json"):
    doc = SystemDocument(kind="plant-controller",
                         plant=TransferMatrix(1, 1, [rf(1, Z)]),
                         controller=TransferMatrix(1, 1, [rf(HALF)]))
    path = tmp_path / name
    save_system(doc, path)
    return path


def write_raw_scalar(tmp_path, value, name="raw.json"):
    doc = SystemDocument(
        kind="raw-realization",
        realization_matrix=TransferMatrix(1, 1, [value], (("s", 1),), (("s", 1),)))
    path = tmp_path / name
    save_system(doc, path)
    return path


def test_analyze_stable_loop(tmp_path, capsys):
    system = write_fig4(tmp_path)
    report = tmp_path / "report.json"
    assert main(["analyze", str(system), "--report", str(report)]) == 0
    data = load_report(report)
    assert data["certificate"]["verdict"]["status"] == "stable"
    assert any(abs(p[0] - 0.5) < 1e-9 for p in data["result"]["poles"])
    assert "stable" in capsys.readouterr().out


def test_analyze_marginal_exit_code(tmp_path):
    system = write_raw_scalar(tmp_path, rf(1, Z))  # S = z/(z-1), pole at 1
    assert main(["analyze", str(system)]) == 2


def test_analyze_unstable_exit_code(tmp_path):
    system = write_raw_scalar(tmp_path, rf(2, Z))  # S = z/(z-2)
    assert main(["analyze", str(system)]) == 3


def test_analyze_algebraic_loop_exit_4(tmp_path):
    blocks = (("a", 1), ("b", 1))
    doc = SystemDocument(
        kind="raw-realization",
        realization_matrix=TransferMatrix(2, 2, [rf(0), rf(1), rf(1), rf(0)],
                                          blocks, blocks))
    path = tmp_path / "loop.json"
    save_system(doc, path)
    assert main(["analyze", str(path)]) == 4


def test_parse_error_exit_64(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"version": "realstab/1", "kind": "raw-realization", '
                    '"realization": {"entries": [["1/0"]], '
                    '"row_blocks": [["s", 1]], "col_blocks": [["s", 1]]}}')
    assert main(["analyze", str(path)]) == 64
    missing = tmp_path / "nope.json"
    assert main(["analyze", str(missing)]) == 64


def test_dimension_error_exit_65(tmp_path):
    doc = SystemDocument(kind="plant-controller",
                         plant=TransferMatrix.zeros(2, 1),
                         controller=TransferMatrix.zeros(2, 1))
    path = tmp_path / "dims.json"
    save_system(doc, path)
    assert main(["analyze", str(path)]) == 65


def test_usage_error_exit_64():
    assert main(["margin"]) == 64
    assert main(["no-such-command"]) == 64


def write_delta(tmp_path, entry, name="delta.json"):
    blocks = (("s", 1),)
    delta = TransferMatrix(1, 1, [entry], blocks, blocks)
    pert = AdditivePerturbation(delta, frozenset({("s", "s")}))
    path = tmp_path / name
    path.write_text(dumps_canonical(perturbation_to_json(pert)))
    return path


def test_perturb_scalar_pole_shift(tmp_path):
    a, b = Fraction(1, 3), Fraction(1, 4)
    system = write_raw_scalar(tmp_path, rf(a, Z))
    delta = write_delta(tmp_path, rf(b, Z))
    report = tmp_path / "report.json"
    assert main(["perturb", str(system), str(delta), "--report", str(report)]) == 0
    data = load_report(report)
    assert data["result"]["forms_agree"] is True
    (pole,), = [p for p in data["result"]["poles"]],
    assert abs(data["result"]["poles"][0][0] - float(a + b)) < 1e-9


def test_perturb_zero_delta_matches_analyze(tmp_path):
    system = write_raw_scalar(tmp_path, rf(Fraction(1, 3), Z))
    delta = write_delta(tmp_path, rf(0))
    r1 = tmp_path / "r1.json"
    r2 = tmp_path / "r2.json"
    assert main(["perturb", str(system), str(delta), "--report", str(r1)]) == 0
    assert main(["analyze", str(system), "--report", str(r2)]) == 0
    assert load_report(r1)["certificate"]["verdict"] == \
        load_report(r2)["certificate"]["verdict"]


def test_perturb_singular_exit_5(tmp_path):
    system = write_raw_scalar(tmp_path, rf(0))  # S = 1
    delta = write_delta(tmp_path, rf(1))  # 1 - 1 = 0
    assert main(["perturb", str(system), str(delta)]) == 5


def test_margin_missing_blocks_exit_66(tmp_path):
    system = write_fig4(tmp_path)
    assert main(["margin", str(system), "--condition", "cor3"]) == 66


def test_synthesize_iop_then_margin(tmp_path, capsys):
    system = write_fig4(tmp_path)
    out = tmp_path / "with_iop.json"
    assert main(["synthesize", str(system), "--family", "iop", "--out", str(out)]) == 0
    loaded = load_system(out)
    quad = doc_iop(loaded)
    assert iop_verify(quad.G, quad)

    report = tmp_path / "margin.json"
    assert main(["margin", str(out), "--condition", "cor3",
                 "--report", str(report)]) == 0
    data = load_report(report)
    assert abs(data["result"]["epsilon"] - 1.0) < 1e-6
    assert data["certificate"]["kind"] == "small-gain-IOP"


def test_margin_probe_reports_witness(tmp_path):
    system = write_fig4(tmp_path)
    out = tmp_path / "with_iop.json"
    main(["synthesize", str(system), "--family", "iop", "--out", str(out)])
    report = tmp_path / "margin.json"
    assert main(["margin", str(out), "--condition", "cor3", "--probe",
                 "--report", str(report)]) == 0
    probe = load_report(report)["result"]["probe"]
    assert probe["conclusive"] is True
    assert probe["boundary_distance"] <= 1e-6


def test_margin_infinite_for_zero_input_map(tmp_path):
    doc = SystemDocument(kind="plant-controller",
                         plant=TransferMatrix(1, 1, [rf(1, Z)]),
                         controller=TransferMatrix.zeros(1, 1))
    system = tmp_path / "open.json"
    save_system(doc, system)
    out = tmp_path / "open_iop.json"
    assert main(["synthesize", str(system), "--family", "iop", "--out", str(out)]) == 0
    report = tmp_path / "margin.json"
    assert main(["margin", str(out), "--condition", "cor3",
                 "--report", str(report)]) == 0
    assert load_report(report)["result"]["epsilon"] == "inf"


def test_synthesize_sls_sf_writes_deadbeat_maps(tmp_path):
    ss = StateSpace([[HALF]], [[1]], [[1]], [[0]])
    doc = SystemDocument(kind="state-feedback", state_space=ss,
                         controller=TransferMatrix(1, 1, [rf(-HALF)]),
                         gains={"K": ((Fraction(-1, 2),),)})
    system = tmp_path / "sf.json"
    save_system(doc, system)
    out = tmp_path / "sf_sls.json"
    assert main(["synthesize", str(system), "--family", "sls-sf",
                 "--out", str(out)]) == 0
    loaded = load_system(out)
    assert loaded.kind == "sf-sls"
    assert loaded.phi_x == TransferMatrix(1, 1, [rf(1, Z)])
    assert loaded.phi_u == TransferMatrix(1, 1, [rf(-HALF, Z)])


def test_synthesize_iop_rejects_unstable_loop(tmp_path):
    doc = SystemDocument(kind="plant-controller",
                         plant=TransferMatrix(1, 1, [rf(1, Z - 2)]),
                         controller=TransferMatrix.zeros(1, 1))
    system = tmp_path / "unstable.json"
    save_system(doc, system)
    out = tmp_path / "out.json"
    assert main(["synthesize", str(system), "--family", "iop",
                 "--out", str(out)]) == 7


def test_synthesize_rejects_non_stabilizing_gain(tmp_path):
    ss = StateSpace([[2]], [[0]], [[1]], [[0]])
    doc = SystemDocument(kind="state-feedback", state_space=ss,
                         controller=TransferMatrix.zeros(1, 1))
    system = tmp_path / "sf.json"
    save_system(doc, system)
    out = tmp_path / "out.json"
    assert main(["synthesize", str(system), "--family", "sls-sf",
                 "--out", str(out), "--gains", '{"K": [["0"]]}']) == 7


def test_synthesize_youla_and_sls_of(tmp_path):
    ss = StateSpace([[HALF]], [[1]], [[1]], [[0]])
    doc = SystemDocument(kind="output-feedback", state_space=ss,
                         controller=TransferMatrix(1, 1, [rf(-HALF)]))
    system = tmp_path / "of.json"
    save_system(doc, system)

    youla_out = tmp_path / "youla.json"
    assert main(["synthesize", str(system), "--family", "youla", "--out",
                 str(youla_out), "--gains",
                 '{"F": [["-1/2"]], "L": [["-1/2"]]}']) == 0
    cf = doc_youla(load_system(youla_out))
    assert cf.identity_holds()

    of_out = tmp_path / "of_sls.json"
    assert main(["synthesize", str(system), "--family", "sls-of",
                 "--out", str(of_out)]) == 0
    loaded = load_system(of_out)
    maps = doc_sls_of(loaded)
    assert sls_of_verify(ss, maps)


def test_margin_cor8_after_sls_of_synthesis(tmp_path):
    ss = StateSpace([[HALF]], [[1]], [[1]], [[0]])
    doc = SystemDocument(kind="output-feedback", state_space=ss,
                         controller=TransferMatrix(1, 1, [rf(-HALF)]))
    system = tmp_path / "of.json"
    save_system(doc, system)
    out = tmp_path / "of_sls.json"
    assert main(["synthesize", str(system), "--family", "sls-of",
                 "--out", str(out)]) == 0
    report = tmp_path / "margin.json"
    assert main(["margin", str(out), "--condition", "cor8", "--probe",
                 "--report", str(report)]) == 0
    data = load_report(report)
    from realstab.sls import sls_of_margin
    maps = doc_sls_of(load_system(out))
    assert abs(data["result"]["epsilon"] - sls_of_margin(maps)) < 1e-9
    assert data["certificate"]["kind"] == "small-gain-SLS-OF"
    assert main(["margin", str(system), "--condition", "cor8"]) == 66


def test_sample_cor7_through_files(tmp_path):
    ss = StateSpace([[HALF]], [[1]], [[1]], [[0]])
    doc = SystemDocument(kind="output-feedback", state_space=ss,
                         controller=TransferMatrix(1, 1, [rf(-HALF)]))
    system = tmp_path / "of.json"
    save_system(doc, system)
    out = tmp_path / "of_sls.json"
    main(["synthesize", str(system), "--family", "sls-of", "--out", str(out)])
    assert main(["sample", str(out), "--radius", "0.7", "--n", "40",
                 "--seed", "3", "--condition", "cor7"]) == 0


def test_sample_exit_codes(tmp_path):
    system = write_fig4(tmp_path)
    out = tmp_path / "with_iop.json"
    main(["synthesize", str(system), "--family", "iop", "--out", str(out)])
    report = tmp_path / "sample.json"
    assert main(["sample", str(out), "--radius", "0.9", "--n", "50",
                 "--seed", "0", "--condition", "cor3",
                 "--report", str(report)]) == 0
    data = load_report(report)
    assert data["certificate"]["sample_stats"]["n_stable"] == 50
    assert main(["sample", str(out), "--radius", "0.9", "--n", "0",
                 "--condition", "cor3"]) == 64
    assert main(["sample", str(out), "--radius", "-1", "--n", "5",
                 "--condition", "cor3"]) == 64


def test_sample_oversized_radius_reports_exit_1(tmp_path):
    system = write_fig4(tmp_path)
    out = tmp_path / "with_iop.json"
    main(["synthesize", str(system), "--family", "iop", "--out", str(out)])
    # Radius 4 with constant blocks finds destabilizing samples quickly.
    code = main(["sample", str(out), "--radius", "4.0", "--n", "100",
                 "--seed", "1", "--order", "0", "--condition", "cor3"])
    assert code == 1


def test_sample_lemma2_direct_with_constraint_hook(tmp_path):
    system = write_raw_scalar(tmp_path, rf(Fraction(1, 4), Z))
    report = tmp_path / "sample.json"
    code = main(["sample", str(system), "--radius", "0.2", "--n", "20",
                 "--seed", "0", "--condition", "lemma2-direct",
                 "--constraint", "realstab.matrix:_missing"])
    assert code == 64  # bad hook spec is a usage problem

    hook_mod = tmp_path / "hookmod.py"
    hook_mod.write_text("def always_true(r, s):\n    return True\n")
    import sys
    sys.path.insert(0, str(tmp_path))
    try:
        code = main(["sample", str(system), "--radius", "0.2", "--n", "20",
                     "--seed", "0", "--condition", "lemma2-direct",
                     "--constraint", "hookmod:always_true",
                     "--report", str(report)])
    finally:
        sys.path.remove(str(tmp_path))
    assert code == 0
    assert load_report(report)["result"]["constraint_violations"] == 0


def test_freqresp_csv(tmp_path):
    system = write_fig4(tmp_path)
    out = tmp_path / "resp.csv"
    assert main(["freqresp", str(system), "--points", "3", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "omega,sigma_1,sigma_2"
    assert len(lines) == 4
    assert main(["freqresp", str(system), "--points", "1", "--out", str(out)]) == 64


def test_freqresp_deterministic_bytes(tmp_path):
    system = write_fig4(tmp_path)
    out1 = tmp_path / "r1.csv"
    out2 = tmp_path / "r2.csv"
    main(["freqresp", str(system), "--points", "33", "--out", str(out1)])
    main(["freqresp", str(system), "--points", "33", "--out", str(out2)])
    assert out1.read_bytes() == out2.read_bytes()


def test_freqresp_pole_on_grid_exit_6(tmp_path):
    system = write_raw_scalar(tmp_path, rf(1, Z))  # S has a pole at z = 1
    out = tmp_path / "resp.csv"
    assert main(["freqresp", str(system), "--points", "5", "--out", str(out)]) == 6


def test_reports_omit_timing_by_default(tmp_path):
    system = write_fig4(tmp_path)
    report = tmp_path / "report.json"
    main(["analyze", str(system), "--report", str(report)])
    assert "elapsed_seconds" not in load_report(report)
    main(["analyze", str(system), "--report", str(report), "--timing"])
    assert "elapsed_seconds" in load_report(report)
