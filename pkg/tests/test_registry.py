import json
from fractions import Fraction

import pytest

from cylsos.errors import RegistryError, UnsupportedGenerators
from cylsos.polyring import Poly, parse_poly
from cylsos.registry import (
    ArchimedeanWitness,
    MonomialCert,
    Registry,
    builtin_certs_n1,
    c9,
    corner_monomial,
    corner_vectors,
    load_registry,
    registry_from_json,
    resolve_registry,
    verify_entry,
    verify_witness,
)
from cylsos.sos1d import SosPoly

P = parse_poly
ONE = P("1", 1)
X = P("x", 1)
UNIT = (X, P("1 - x", 1))
DESK = (P("x - 1/4", 1), P("3/4 - x", 1))


def test_corner_monomials():
    assert corner_vectors(1) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert len(corner_vectors(3)) == 16
    assert corner_monomial((1, 1), 1) == P("x - x^2", 1)
    assert corner_monomial((1, 0, 1), 2) == P("x2 - x1*x2 - x2^2", 2)


def test_builtin_unit_interval():
    reg = builtin_certs_n1(UNIT)
    assert reg.entries[(0, 0)].sigmas[0].terms == ((1, ONE),)
    top = reg.entries[(1, 1)]
    assert top.sigmas[1].terms == ((1, P("1 - x", 1)),)
    assert top.sigmas[2].terms == ((1, X),)
    assert verify_entry(top, UNIT)
    assert c9(reg) == 3


def test_builtin_desk_interval():
    reg = builtin_certs_n1(DESK)
    e = reg.entries[(0, 1)]
    assert e.sigmas[0].terms == ((Fraction(1, 4), ONE),)
    assert e.sigmas[1].terms == ((1, ONE),)
    assert all(verify_entry(c, DESK) for c in reg.entries.values())
    assert c9(reg) == 3
    assert reg.archimedean.bound == Fraction(9, 16)
    assert verify_witness(reg.archimedean, DESK, 1)


@pytest.mark.parametrize(
    "gens",
    [(P("x^2", 1),), (P("x + 1", 1), P("1 - x", 1)), (P("x1", 2), P("1 - x1", 2))],
)
def test_builtin_unsupported(gens):
    with pytest.raises(UnsupportedGenerators):
        builtin_certs_n1(gens)


def test_archimedean_identity_as_witness():
    g = (P("(1 - x^2)^3", 1),)
    w = ArchimedeanWitness(
        Fraction(4, 3),
        (
            SosPoly(((Fraction(4, 3), P("x*(x^2 - 3/2)", 1)),), 1),
            SosPoly(((Fraction(4, 3), ONE),), 1),
        ),
    )
    assert verify_witness(w, g, 1)
    assert not verify_witness(ArchimedeanWitness(Fraction(5, 3), w.sigmas), g, 1)


def test_verify_entry_rejects_perturbation_and_negative_weight():
    good = builtin_certs_n1(UNIT).entries[(1, 1)]
    bumped = MonomialCert(good.v, (SosPoly(((1, ONE),), 1),) + good.sigmas[1:])
    assert not verify_entry(bumped, UNIT)
    negative = MonomialCert(
        (0, 0), (SosPoly(((2, ONE),), 1), SosPoly(((-1, ONE),), 1), SosPoly((), 1))
    )
    assert not verify_entry(negative, (P("1", 1), X))


def test_constant_sigmas_give_max_generator_degree():
    gens = (X, P("1 - x", 1), P("x - x^2", 1))
    const = SosPoly(((1, ONE),), 1)
    empty = SosPoly((), 1)
    entries = {
        (0, 0): MonomialCert((0, 0), (const, empty, empty, empty)),
        (0, 1): MonomialCert((0, 1), (empty, const, empty, empty)),
        (1, 0): MonomialCert((1, 0), (empty, empty, const, empty)),
        (1, 1): MonomialCert((1, 1), (empty, empty, empty, const)),
    }
    reg = Registry(1, gens, entries)
    reg.verify_all()
    assert c9(reg) == 2


def test_c9_needs_complete_registry():
    reg = Registry(1, UNIT, {(0, 0): builtin_certs_n1(UNIT).entries[(0, 0)]})
    with pytest.raises(RegistryError) as info:
        c9(reg)
    assert (1, 1) in info.value.missing


def test_file_round_trip(tmp_path):
    path = tmp_path / "reg.json"
    builtin_certs_n1(DESK).save(path)
    reg = load_registry(path, DESK)
    assert len(reg.entries) == 4
    assert c9(reg) == 3


def test_file_perturbed_entry(tmp_path):
    data = builtin_certs_n1(DESK).to_json()
    entry = next(e for e in data["entries"] if e["v"] == [1, 0])
    entry["sigmas"][0].append({"weight": "1", "poly": "1"})
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    with pytest.raises(RegistryError) as info:
        load_registry(path)
    assert info.value.offending == (1, 0)


def test_file_missing_entry(tmp_path):
    data = builtin_certs_n1(DESK).to_json()
    data["entries"] = [e for e in data["entries"] if e["v"] != [1, 0]]
    with pytest.raises(RegistryError) as info:
        registry_from_json(data)
    assert info.value.missing == [(1, 0)]


def test_file_generator_mismatch():
    data = builtin_certs_n1(DESK).to_json()
    with pytest.raises(RegistryError):
        registry_from_json(data, UNIT)


def test_resolve_prefers_builtin_and_refuses_without_numeric():
    assert resolve_registry(DESK, 1).source == "builtin-n1"
    square = (P("x1 - 1/8", 2), P("3/8 - x1", 2), P("x2 - 1/8", 2), P("3/8 - x2", 2))
    with pytest.raises(UnsupportedGenerators):
        resolve_registry(square, 2)


def test_numeric_fallback_on_interior_square():
    pytest.importorskip("cvxpy")
    square = (P("x1 - 1/8", 2), P("3/8 - x1", 2), P("x2 - 1/8", 2), P("3/8 - x2", 2))
    reg = resolve_registry(square, 2, allow_numeric=True)
    assert reg.source == "numeric-experimental"
    reg.verify_all()
    assert not reg.missing()
    assert all(isinstance(p, Poly) for c in reg.entries.values() for s in c.sigmas for _, p in s.terms)
