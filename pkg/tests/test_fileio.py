import json
import math
from fractions import Fraction

import pytest

from realstab.analysis import StabilityVerdict
from realstab.errors import MissingBlocks, SchemaError
from realstab.fileio import (
    SystemDocument,
    build_realization,
    certificate_from_json,
    certificate_to_json,
    doc_iop,
    doc_sls_of,
    doc_youla,
    dumps_canonical,
    load_perturbation,
    load_report,
    load_system,
    parse_rational,
    parse_ratfun,
    parse_system,
    parse_tm,
    perturbation_to_json,
    ratfun_to_json,
    save_report,
    save_system,
    system_to_json,
    tm_to_json,
    verdict_from_json,
    verdict_to_json,
)
from realstab.iop import iop_from_loop, iop_verify
from realstab.matrix import StateSpace, TransferMatrix
from realstab.sls import sls_of_from_controller, sls_of_verify
from realstab.uncertainty import Certificate, SampleStats
from realstab.youla import coprime_from_gains

from conftest import HALF, Z, random_proper_tm, rf


def test_parse_rational_forms():
    assert parse_rational(3) == Fraction(3)
    assert parse_rational("-5/2") == Fraction(-5, 2)
    with pytest.raises(SchemaError):
        parse_rational("1/0")
    with pytest.raises(SchemaError):
        parse_rational(True)
    with pytest.raises(SchemaError):
        parse_rational(0.5)


def test_ratfun_round_trip(rng):
    for _ in range(40):
        f = random_proper_tm(rng, 1, 1)[0, 0]
        assert parse_ratfun(ratfun_to_json(f)) == f
    assert parse_ratfun("1/2") == rf(HALF)
    assert parse_ratfun(4) == rf(4)


def test_tm_round_trip(rng):
    X = random_proper_tm(rng, 2, 3).with_blocks((("a", 2),), (("b", 1), ("c", 2)))
    back = parse_tm(tm_to_json(X))
    assert back == X
    assert back.row_blocks == X.row_blocks and back.col_blocks == X.col_blocks


def test_tm_shape_validation():
    with pytest.raises(SchemaError):
        parse_tm({"entries": [["1"], ["2", "3"]]})
    with pytest.raises(SchemaError):
        parse_tm({"rows": 2, "cols": 1, "entries": [["1"]]})
    with pytest.raises(SchemaError):
        parse_tm({"entries": []})


def _plant_controller_doc():
    return SystemDocument(kind="plant-controller",
                          plant=TransferMatrix(1, 1, [rf(1, Z)]),
                          controller=TransferMatrix(1, 1, [rf(HALF)]))


def test_system_round_trip_all_kinds(tmp_path):
    ss = StateSpace([[HALF]], [[1]], [[1]], [[0]])
    docs = [
        _plant_controller_doc(),
        SystemDocument(kind="state-feedback", state_space=ss,
                       controller=TransferMatrix(1, 1, [rf(-HALF)])),
        SystemDocument(kind="sf-sls", state_space=ss,
                       phi_x=TransferMatrix(1, 1, [rf(1, Z)]),
                       phi_u=TransferMatrix(1, 1, [rf(-HALF, Z)])),
        SystemDocument(kind="output-feedback", state_space=ss,
                       controller=TransferMatrix(1, 1, [rf(-HALF)]),
                       gains={"F": ((Fraction(-1, 2),),)}),
        SystemDocument(
            kind="raw-realization",
            realization_matrix=TransferMatrix(1, 1, [rf(HALF, Z)],
                                              (("s", 1),), (("s", 1),))),
    ]
    for i, doc in enumerate(docs):
        path = tmp_path / f"sys{i}.json"
        save_system(doc, path)
        back = load_system(path)
        assert system_to_json(back) == system_to_json(doc)
        sys_r = build_realization(back)
        assert sys_r.R.is_square


def test_version_and_kind_checks():
    with pytest.raises(SchemaError):
        parse_system({"version": "realstab/2", "kind": "plant-controller"})
    with pytest.raises(SchemaError):
        parse_system({"version": "realstab/1", "kind": "mystery"})
    with pytest.raises(SchemaError):
        parse_system({"version": "realstab/1", "kind": "plant-controller"})


def test_malformed_json_raises_schema_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(SchemaError):
        load_system(path)


def test_iop_section_round_trip(tmp_path):
    doc = _plant_controller_doc()
    quad = iop_from_loop(doc.plant, doc.controller)
    doc.iop = {"Y": quad.Y, "W": quad.W, "U": quad.U, "Z": quad.Z}
    path = tmp_path / "iop.json"
    save_system(doc, path)
    loaded = doc_iop(load_system(path))
    assert iop_verify(loaded.G, loaded)


def test_missing_sections_raise(tmp_path):
    doc = _plant_controller_doc()
    path = tmp_path / "plain.json"
    save_system(doc, path)
    loaded = load_system(path)
    with pytest.raises(MissingBlocks):
        doc_iop(loaded)
    with pytest.raises(MissingBlocks):
        doc_sls_of(loaded)
    with pytest.raises(MissingBlocks):
        doc_youla(loaded)


def test_sls_of_section_round_trip(tmp_path):
    ss = StateSpace([[HALF]], [[1]], [[1]], [[0]])
    maps = sls_of_from_controller(ss, TransferMatrix(1, 1, [rf(-HALF)]))
    doc = SystemDocument(kind="output-feedback", state_space=ss,
                         controller=TransferMatrix(1, 1, [rf(-HALF)]),
                         sls_of={"phi_xx": maps.phi_xx, "phi_xy": maps.phi_xy,
                                 "phi_ux": maps.phi_ux, "phi_uy": maps.phi_uy})
    path = tmp_path / "of.json"
    save_system(doc, path)
    loaded = doc_sls_of(load_system(path))
    assert sls_of_verify(ss, loaded)
    assert loaded.defect1.is_zero() and loaded.defect2.is_zero()


def test_youla_section_round_trip(tmp_path):
    ss = StateSpace([[0]], [[1]], [[1]], [[0]])
    cf = coprime_from_gains(ss, [[0]], [[0]])
    doc = SystemDocument(kind="state-feedback", state_space=ss,
                         controller=TransferMatrix.zeros(1, 1),
                         youla={"ml": cf.Ml, "nl": cf.Nl, "vl": cf.Vl, "ul": cf.Ul,
                                "ur": cf.Ur, "nr": cf.Nr, "vr": cf.Vr, "mr": cf.Mr})
    path = tmp_path / "youla.json"
    save_system(doc, path)
    loaded = doc_youla(load_system(path))
    assert loaded.identity_holds()


def test_perturbation_round_trip(tmp_path):
    blocks = (("y", 1), ("u", 1))
    delta = TransferMatrix(2, 2, [rf(0), rf(HALF, Z), rf(0), rf(0)], blocks, blocks)
    from realstab.realization import AdditivePerturbation
    pert = AdditivePerturbation(delta, frozenset({("y", "u")}))
    path = tmp_path / "delta.json"
    path.write_text(dumps_canonical(perturbation_to_json(pert)))
    back = load_perturbation(path)
    assert back.delta == delta
    assert back.block_mask == pert.block_mask


def test_perturbation_default_mask(tmp_path):
    blocks = (("y", 1), ("u", 1))
    delta = TransferMatrix(2, 2, [rf(0), rf(HALF, Z), rf(0), rf(0)], blocks, blocks)
    payload = {"version": "realstab/1", "kind": "perturbation", "delta": tm_to_json(delta)}
    path = tmp_path / "delta.json"
    path.write_text(dumps_canonical(payload))
    back = load_perturbation(path)
    assert ("u", "y") in back.block_mask and ("y", "u") in back.block_mask


def test_verdict_serialization_round_trip():
    v = StabilityVerdict("unstable", ((complex(1.5, -0.25), 1.5206906325745548),))
    assert verdict_from_json(verdict_to_json(v)) == v
    improper = StabilityVerdict("improper", ((0, 1),))
    assert verdict_from_json(verdict_to_json(improper)) == improper


def test_certificate_round_trip_with_infinite_margin():
    cert = Certificate(kind="monte-carlo", margin=math.inf,
                       verdict=StabilityVerdict("stable"),
                       condition_ref="cor3",
                       sample_stats=SampleStats(3, 3, 0, 0, 0.25), seed=5)
    encoded = certificate_to_json(cert)
    assert encoded["margin"] == "inf"
    assert certificate_from_json(json.loads(json.dumps(encoded))) == cert


def test_report_canonical_bytes(tmp_path):
    report = {"version": "realstab/1", "kind": "report", "b": 2, "a": [1.5, "x"]}
    p1 = tmp_path / "r1.json"
    p2 = tmp_path / "r2.json"
    save_report(report, p1)
    save_report(dict(reversed(list(report.items()))), p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert load_report(p1) == report
