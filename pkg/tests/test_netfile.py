import pytest

from hushrelay.netfile import (
    ParseError,
    dumps_network,
    load_network,
    loads_network,
    save_network,
)
from hushrelay.topology import dumps_workload, loads_workload, Transaction

from .conftest import five_node_graph

EXAMPLE = """\
# five nodes, five channels
pcn 5
chan 0 1 10 0
chan 0 2 10 0
chan 1 3 10 0
chan 2 3 15 0   # the middle hop
chan 3 4 20 0
"""


def test_parse_example_network():
    g = loads_network(EXAMPLE)
    assert g.n == 5
    assert g.channel_count == 5
    assert g.capacity(3, 4) == 20
    assert g == five_node_graph()


def test_round_trip_is_identity():
    g = loads_network(EXAMPLE)
    text = dumps_network(g)
    g2 = loads_network(text)
    assert g2 == g
    assert dumps_network(g2) == text


def test_file_round_trip(tmp_path):
    path = tmp_path / "net.pcn"
    save_network(five_node_graph(), path)
    assert load_network(path) == five_node_graph()


def test_empty_channel_list_is_valid():
    g = loads_network("pcn 4\n")
    assert g.n == 4
    assert g.channel_count == 0


def test_malformed_capacity_reports_line():
    bad = "pcn 3\nchan 0 1 5 5\nchan 1 2 x 5\n"
    with pytest.raises(ParseError) as exc:
        loads_network(bad)
    assert exc.value.line_no == 3


def test_missing_header_rejected():
    with pytest.raises(ParseError):
        loads_network("chan 0 1 5 5\n")


def test_wrong_field_count_rejected():
    with pytest.raises(ParseError) as exc:
        loads_network("pcn 2\nchan 0 1 5\n")
    assert exc.value.line_no == 2


def test_duplicate_channel_reports_line():
    bad = "pcn 3\nchan 0 1 5 5\nchan 1 0 5 5\n"
    with pytest.raises(ParseError) as exc:
        loads_network(bad)
    assert exc.value.line_no == 3


def test_out_of_range_node_rejected():
    with pytest.raises(ParseError):
        loads_network("pcn 2\nchan 0 5 1 1\n")


def test_empty_file_rejected():
    with pytest.raises(ParseError):
        loads_network("# nothing here\n")


def test_workload_round_trip():
    txns = [Transaction(0, 3, 15), Transaction(2, 1, 40)]
    text = dumps_workload(txns)
    assert text == "txn 0 3 15\ntxn 2 1 40\n"
    assert loads_workload(text) == txns


def test_workload_rejects_same_endpoints():
    with pytest.raises(ParseError):
        loads_workload("txn 1 1 5\n")
