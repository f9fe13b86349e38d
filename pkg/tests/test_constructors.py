import pytest

from artifact.coloring import Undetermined, constant, parity_z
from artifact.constructors import (PHI_BLOCKS, Pattern, SubstitutionSystem, finite_group_coloring, free_wordlength,
                                   from_spec, kappa, morse_thue_bit, morse_thue_z, phi, product, quotient_extension,
                                   rf_parity, rf_parity_witness, substitution_family_z, valuation)
from artifact.groups import Free, FiniteTable, Product, Zd
from artifact.verifier import check_blocking, check_orthogonality


def test_phi_block_structure():
    assert phi(Pattern("0"), 0).word() == "0010010"
    assert phi(Pattern("0"), 1).word() == "1010101"
    p = Pattern("011")
    for i in (0, 1):
        q = phi(p, i)
        assert len(q) == 21
        assert p.refines(q) and not q.refines(p)
        assert phi(p.conjugate(), i) == q.conjugate()
    assert PHI_BLOCKS[0][3] == 0 and PHI_BLOCKS[1][3] == 0


def test_pattern_is_centered():
    p = Pattern("0110011")
    assert p.radius == 3
    assert list(p.domain()) == list(range(-3, 4))
    with pytest.raises(ValueError):
        Pattern("01")


def test_substitution_level_lengths_and_nesting():
    for alpha in ("000", "010", "111"):
        sys_ = SubstitutionSystem(alpha)
        assert [len(sys_.word(n)) for n in range(4)] == [1, 21, 441, 9261]
        for n in range(1, 4):
            inner, outer = sys_.word(n - 1), sys_.word(n)
            R, r = (len(outer) - 1) // 2, (len(inner) - 1) // 2
            assert outer[R - r:R + r + 1] == inner


def test_substitution_frozen_prefix():
    p, _ = substitution_family_z("010", 2)
    assert p.word()[:50] == "11011011101101001001000100100010010110110111011011"


def test_substitution_is_undetermined_off_its_domain():
    _, x = substitution_family_z("000", 1)
    assert isinstance(x.eval((11,)), Undetermined)
    assert x.value((10,)) in (0, 1)


def test_periodic_extension_agrees_with_prefix():
    _, x = substitution_family_z("010", 3)
    _, y = substitution_family_z("010", 3, extend="periodic")
    assert all(x.value((k,)) == y.value((k,)) for k in range(-4630, 4631, 7))


def test_substitution_forced_disagreement():
    # at level n the cells just right of the middle block and n places left differ
    for alpha in ("000", "101"):
        sys_ = SubstitutionSystem(alpha)
        for n in (1, 2, 3):
            w = sys_.word(n)
            K = (7 * 21 ** (n - 1) - 1) // 2 + 1
            R = (len(w) - 1) // 2
            assert w[R + K] != w[R + K - n]


def test_morse_thue():
    assert [morse_thue_bit(i) for i in range(16)] == [0, 1, 1, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0]
    assert morse_thue_z().value((-3,)) == 0


def test_free_wordlength_constant_on_spheres():
    F = Free(2)
    xs = free_wordlength(morse_thue_z(), 2)
    for r in range(4):
        assert len({xs.value(w) for w in F.ball(r) if len(w) == r}) == 1


def test_rf_parity_and_valuation():
    assert valuation((12,), 2) == 2
    assert valuation((0,), 2) is None
    assert [rf_parity().value((i,)) for i in range(-4, 9)] == [0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 1]
    assert rf_parity_witness((12,)) == [(i,) for i in range(32)]
    assert rf_parity_witness((3,)) == [(i,) for i in range(8)]


def test_kappa_on_z():
    G = Zd(1)
    x = kappa(G, 2, [(0,), (1,)], [constant(G, 0), constant(G, 1)])
    assert [x.value((i,)) for i in range(4)] == [0, 1, 0, 1]
    with pytest.raises(ValueError):
        kappa(G, 2, [(0,), (2,)], [constant(G, 0), constant(G, 1)])


def test_kappa_on_finite_group():
    C = FiniteTable.cyclic(4)
    x = kappa(C, [0, 2], [0, 1], [finite_group_coloring(C), constant(C, 1)])
    assert [x.value(g) for g in range(4)] == [0, 1, 1, 1]


def test_product_coloring():
    x = product(parity_z(), morse_thue_z())
    P = x.group
    assert isinstance(P, Product)
    assert x.value(((1,), (3,))) == 0
    assert x.value(((1,), (1,))) == 1


def test_quotient_extension_undetermined_off_z():
    G = Zd(1)
    x = quotient_extension(G, 3, {(0,): 0, (1,): 1}, [constant(G, 0), constant(G, 1)])
    assert [x.value((i,)) for i in (0, 1, 3, 4)] == [0, 1, 0, 1]
    assert isinstance(x.eval((2,)), Undetermined)


def test_from_spec_dispatch():
    x = from_spec({"ctor": "substitution_z", "alpha": "000", "level": 2})
    assert x.ident["alpha"] == "000"
    assert from_spec({"ctor": "parity"}).value((3,)) == 1
    with pytest.raises(ValueError):
        from_spec({"ctor": "nope"})


def test_morse_thue_blocks_shift_one_with_small_witness():
    rep = check_blocking(morse_thue_z(), (1,), 200, r_max=6)
    assert rep.confirmed and rep.searched_radius <= 3


def test_parity_is_not_orthogonal_to_its_shift_conjugate():
    # parity and its conjugate are shifts of each other
    x = parity_z()
    y = from_spec({"ctor": "conjugate", "of": {"ctor": "parity"}})
    rep = check_orthogonality(x, y, 20, T=[(0,), (1,)])
    assert rep.status.value == "Refuted"


def test_orthogonality_witness_scales_with_first_difference():
    # alpha and beta first differing at index n need spacing equal to the level-n length
    def orth(a, b, step):
        _, x = substitution_family_z(a, 3)
        _, y = substitution_family_z(b, 3)
        return check_orthogonality(x, y, 3087, T=[(i * step,) for i in range(8)]).confirmed

    assert orth("000", "100", 1) and orth("010", "111", 1)
    assert orth("000", "010", 21) and orth("000", "111", 21)
    assert not orth("000", "100", 21) and not orth("010", "111", 21)
