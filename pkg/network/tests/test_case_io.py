import cmath
from dataclasses import fields

import numpy as np
import pytest

from gridflow.exceptions import (
    BadParameter,
    DuplicateBusId,
    MalformedRow,
    MissingBlock,
    MultipleSlackBuses,
    NoSlackBus,
    ZeroImpedanceBranch,
)
from network.case_io import Branch, BusKind, format_case, parse_case, read_case

BUS1 = "\t1\t3\t0\t0\t0\t0\t1\t1\t0\t135\t1\t1.1\t0.9;"
BUS2 = "\t2\t1\t0\t0\t0\t0\t1\t1\t0\t135\t1\t1.1\t0.9;"
LINE = "\t1\t2\t0\t0.1\t0\t100\t100\t100\t0\t0\t1;"

THREE_BUS = """function mpc = case3
mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1	0	135	1	1.1	0.9;
	2	2	20	5	0	0	1	1	0	135	1	1.1	0.9;
	3	1	40	10	0	0	1	1	0	135	1	1.1	0.9;
];
mpc.gen = [
	1	0	0	100	-100	1	100	1;
	2	30	0	100	-100	1.02	100	1;
];
mpc.branch = [
	1	2	0.01	0.1	0	50	50	50	0	0	1;
	1	3	0.02	0.2	0	50	50	50	0	0	1;
	2	3	0.01	0.15	0	0	0	0	0	0	1;
];
"""


def test_two_bus_partition(case2):
    assert case2.n_bus == 2
    assert case2.slack == 0
    assert case2.n_pv == 0
    assert list(case2.pq) == [1]
    assert case2.dimension == 2


def test_two_bus_admittance(case2):
    expected = np.array([[-10j, 10j], [10j, -10j]])
    np.testing.assert_allclose(case2.Y, expected, atol=1e-12)
    np.testing.assert_allclose(case2.Bprime, expected.imag, atol=1e-12)


def test_line_charging_only_touches_y(case2_text, case2):
    charged = parse_case(case2_text.replace(LINE, "\t1\t2\t0\t0.1\t0.2\t100\t100\t100\t0\t0\t1;"))
    np.testing.assert_allclose(np.diag(charged.Y - case2.Y), [0.1j, 0.1j], atol=1e-12)
    np.testing.assert_allclose(charged.Y[0, 1], case2.Y[0, 1])
    np.testing.assert_array_equal(charged.Bprime, case2.Bprime)


def test_ieee30_partition(case30):
    assert case30.n_bus == 30
    assert case30.slack == 0
    assert list(case30.bus_ids[case30.pv]) == [2, 13, 22, 23, 27]
    assert case30.n_pq == 24
    assert case30.dimension == 53
    assert sorted([case30.slack, *case30.pv, *case30.pq]) == list(range(30))


def test_ieee30_admittance_symmetric(case30):
    np.testing.assert_allclose(case30.Y, case30.Y.T, atol=1e-12)
    np.testing.assert_allclose(case30.Bprime, case30.Bprime.T, atol=1e-12)


def dense_admittance(net):
    n = net.n_bus
    Y = np.zeros((n, n), dtype=complex)
    for br in net.branches:
        ys = 1.0 / complex(br.r, br.x)
        ratio = br.tap * cmath.exp(1j * br.shift)
        f, t = br.from_bus, br.to_bus
        Y[f, f] += (ys + 0.5j * br.b_c) / (br.tap * br.tap)
        Y[f, t] += -ys / ratio.conjugate()
        Y[t, f] += -ys / ratio
        Y[t, t] += ys + 0.5j * br.b_c
    for i, bus in enumerate(net.buses):
        Y[i, i] += complex(bus.gs, bus.bs) / net.base_mva
    return Y


def test_ieee30_admittance_matches_branch_loop(case30):
    assert np.max(np.abs(case30.Y - dense_admittance(case30))) < 1e-12


def test_phase_shifter_admittance_matches_branch_loop():
    shifted = "\t1\t2\t0.01\t0.1\t0.02\t50\t50\t50\t0.95\t10\t1;"
    text = THREE_BUS.replace("\t1\t2\t0.01\t0.1\t0\t50\t50\t50\t0\t0\t1;", shifted)
    text = text.replace("\t3\t1\t40\t10\t0\t0\t", "\t3\t1\t40\t10\t2\t15\t")
    net = parse_case(text)
    assert net.branches[0].shift_deg == 10.0
    assert np.max(np.abs(net.Y - dense_admittance(net))) < 1e-12
    assert not np.allclose(net.Y, net.Y.T)


def test_tap_free_rows_sum_to_zero():
    net = parse_case(THREE_BUS)
    np.testing.assert_allclose(net.Y.sum(axis=1), 0.0, atol=1e-12)
    np.testing.assert_allclose(net.Bprime.sum(axis=1), 0.0, atol=1e-12)


def test_bprime_modes(case30_text):
    series = parse_case(case30_text, bprime_mode="series")
    reactance = parse_case(case30_text, bprime_mode="reactance")
    # branch 1-2 has r = 0.02, x = 0.06
    assert series.Bprime[0, 1] == pytest.approx(0.06 / (0.02 ** 2 + 0.06 ** 2))
    assert reactance.Bprime[0, 1] == pytest.approx(1 / 0.06)
    np.testing.assert_array_equal(series.Y, reactance.Y)


def test_unknown_bprime_mode(case2_text):
    with pytest.raises(BadParameter):
        parse_case(case2_text, bprime_mode="fast")


def test_per_unit_quantities():
    net = parse_case(THREE_BUS)
    np.testing.assert_allclose(net.pd, [0.0, 0.2, 0.4])
    np.testing.assert_allclose(net.pg, [0.0, 0.3, 0.0])
    np.testing.assert_allclose(net.vm_setpoint, [1.0, 1.02, 1.0])
    np.testing.assert_array_equal(net.rate_a, [50, 50, 0])
    assert net.name == "case3"
    assert net.describe()["dimension"] == 3


def test_network_arrays_are_read_only(case2):
    with pytest.raises(ValueError):
        case2.Y[0, 0] = 0


@pytest.mark.parametrize("fixture", ["case2", "case30"])
def test_format_case_round_trip(fixture, request):
    net = request.getfixturevalue(fixture)
    again = parse_case(format_case(net))
    assert again.buses == net.buses
    assert again.gens == net.gens
    assert again.branches == net.branches
    assert again.base_mva == net.base_mva
    np.testing.assert_array_equal(again.Y, net.Y)
    assert again.name == net.name


def test_missing_block(case2_text):
    with pytest.raises(MissingBlock) as exc:
        parse_case(case2_text.replace("mpc.branch", "mpc.lines"))
    assert exc.value.context["block"] == "branch"


def test_missing_base_mva(case2_text):
    with pytest.raises(MissingBlock):
        parse_case(case2_text.replace("mpc.baseMVA = 100;", ""))


def test_duplicate_bus_id(case2_text):
    with pytest.raises(DuplicateBusId):
        parse_case(case2_text.replace(BUS2, BUS2.replace("\t2\t1\t", "\t1\t1\t", 1)))


def test_no_slack(case2_text):
    with pytest.raises(NoSlackBus):
        parse_case(case2_text.replace(BUS1, BUS1.replace("\t1\t3\t", "\t1\t2\t", 1)))


def test_multiple_slack(case2_text):
    with pytest.raises(MultipleSlackBuses):
        parse_case(case2_text.replace(BUS2, BUS2.replace("\t2\t1\t", "\t2\t3\t", 1)))


def test_short_row_reports_line(case2_text):
    with pytest.raises(MalformedRow) as exc:
        parse_case(case2_text.replace(BUS2, "\t2\t1\t0\t0;"))
    assert exc.value.line == 9


def test_non_numeric_entry(case2_text):
    with pytest.raises(MalformedRow):
        parse_case(case2_text.replace(BUS2, BUS2.replace("135", "abc")))


def test_unknown_branch_bus(case2_text):
    with pytest.raises(MalformedRow):
        parse_case(case2_text.replace(LINE, LINE.replace("\t1\t2\t", "\t1\t7\t", 1)))


def test_zero_impedance_branch(case2_text):
    with pytest.raises(ZeroImpedanceBranch):
        parse_case(case2_text.replace(LINE, LINE.replace("\t0\t0.1\t", "\t0\t0\t", 1)))


def test_out_of_service_branch_is_skipped():
    text = THREE_BUS.replace("0.01\t0.15\t0\t0\t0\t0\t0\t0\t1;", "0.01\t0.15\t0\t0\t0\t0\t0\t0\t0;")
    net = parse_case(text)
    assert len(net.branches) == 2
    assert "status" not in {f.name for f in fields(Branch)}
    again = parse_case(format_case(net))
    assert again.branches == net.branches


def test_bus_kinds(case30):
    assert case30.buses[0].kind is BusKind.SLACK
    assert case30.buses[1].kind is BusKind.PV


def test_read_case_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_case(str(tmp_path / "nowhere.m"))
