import math

import pytest

from mechgap.distributions import RootIrregular, Triangular, TriangularLimit
from mechgap.errors import DomainError
from mechgap.instances import (
    GOLDEN,
    GenParams,
    gen_ar_ap_iid,
    gen_ar_ap_regular,
    gen_opt_ar_four,
    gen_opt_ar_three,
    gen_opt_ar_two,
    gen_spm_ap_worst,
    solve_v2,
    three_buyer_instance,
    three_buyer_v2_residual,
    verify_feasibility,
)
from mechgap.mechanisms import ap_optimal, ar_revenue, ar_revenue_many, spm_opt_triangular
from mechgap.special import fun_Q_inv, fun_R, fun_V


def test_params_validation():
    for kw in [{"epsilon": 0.0}, {"epsilon": 1.0}, {"n": 0}, {"t": 1.0}]:
        with pytest.raises(DomainError):
            GenParams(**kw)
    assert GenParams(epsilon=0.05).b == pytest.approx(21.0)


def test_spm_ap_small_structure():
    inst, diag = gen_spm_ap_worst(GenParams(epsilon=0.5, n=2))
    assert diag["a"] == pytest.approx(min(1.5, fun_Q_inv(math.log(2.0))))
    assert diag["b"] == 3.0
    assert len(inst) == 4
    assert isinstance(inst[0], TriangularLimit) and inst[-1] == Triangular(1.0, 1.0)
    assert [b.v for b in inst][1:3] == [3.0, diag["a"]]


def test_spm_ap_gains_follow_R():
    inst, _ = gen_spm_ap_worst(GenParams(epsilon=0.1, n=50))
    total = sum(b.v * b.q / (1 - b.q) for b in inst.buyers[1:-1])
    assert total == pytest.approx(fun_R(inst[-2].v), rel=1e-12)


def test_ar_ap_iid_structure():
    assert len(gen_ar_ap_iid(2)) == 2 and all(b == RootIrregular(2) for b in gen_ar_ap_iid(2))
    with pytest.raises(DomainError):
        gen_ar_ap_iid(0)


def test_ar_ap_regular_structure():
    inst, diag = gen_ar_ap_regular(GenParams(epsilon=0.2, n=30))
    assert len(inst) == 60
    assert diag["a"] == pytest.approx(1.2) and diag["b"] == pytest.approx(6.0)
    assert min(b.v for b in inst) == pytest.approx(diag["a"])
    # gains telescope to V(a)
    total = sum(b.v * b.q / (1 - b.q) for b in inst)
    assert total == pytest.approx(fun_V(diag["a"]), rel=1e-12)


def test_ar_ap_regular_small_bound():
    inst, diag = gen_ar_ap_regular(GenParams(epsilon=0.1, n=400))
    assert verify_feasibility(inst) <= 1.0 + 1e-6
    assert ar_revenue(inst, diag["a"]) >= math.pi ** 2 / 6 - 3 * 0.1


def test_opt_ar_two():
    inst = gen_opt_ar_two(100.0)
    assert len(inst) == 2 and inst[0].t == 100.0


def test_v2_residual():
    assert three_buyer_v2_residual(1.5699, 0.8399) == pytest.approx(0.0, abs=1e-3)
    # the log argument tends to 1 as v2 -> v1, leaving v2 - 1
    v1 = 1.3
    assert three_buyer_v2_residual(v1, v1 - 1e-12) == pytest.approx(v1 - 1.0, abs=1e-9)
    with pytest.raises(DomainError):
        three_buyer_v2_residual(GOLDEN + 0.01, 0.5)


def test_three_buyer_generator():
    inst, diag = gen_opt_ar_three()
    assert diag["v1"] == pytest.approx(1.5699, abs=0.01)
    assert diag["v2"] == pytest.approx(0.8399, abs=5e-3)
    assert diag["opt"] == pytest.approx(2.1361, abs=1e-3)
    assert spm_opt_triangular(inst).revenue == pytest.approx(diag["opt"], abs=1e-12)
    assert diag["ar_v1_closed_form"] == pytest.approx(1.0, abs=1e-9)
    assert diag["ar_v2_closed_form"] == pytest.approx(1.0, abs=1e-9)


def test_three_buyer_fixed_v1():
    inst, diag = gen_opt_ar_three(1.5699)
    ar = ar_revenue_many(inst, [diag["v1"], diag["v2"]])
    assert ar == pytest.approx([1.0, 1.0], abs=1e-3)
    assert inst == three_buyer_instance(1.5699, solve_v2(1.5699))
    with pytest.raises(DomainError):
        gen_opt_ar_three(1.7)


def test_four_buyer_instance():
    inst = gen_opt_ar_four()
    assert len(inst) == 4
    ar = ar_revenue_many(inst, [b.v for b in inst])
    assert ar == pytest.approx([1.0] * 4, abs=2e-3)
    assert spm_opt_triangular(inst).revenue == pytest.approx(2.1596, abs=2e-3)
    assert verify_feasibility(inst) <= 1.0 + 2e-3


def test_feasibility_examples():
    from mechgap.distributions import Instance

    assert verify_feasibility(Instance.of(Triangular(1.0, 1.0))) == pytest.approx(1.0)
    assert ap_optimal(gen_opt_ar_two(1e6)).revenue == pytest.approx(1.0, abs=1e-5)
