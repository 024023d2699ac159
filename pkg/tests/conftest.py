import pytest

from hushrelay.graph import ChannelGraph

# Worked five-node example used throughout: S=0, A=1, B=2, C=3, R=4.
# Max flow S->R is 20, limited by the C->R channel.
S, A, B, C, R = range(5)


def five_node_graph() -> ChannelGraph:
    g = ChannelGraph(5)
    g.open_channel(S, A, 10, 0)
    g.open_channel(S, B, 10, 0)
    g.open_channel(A, C, 10, 0)
    g.open_channel(B, C, 15, 0)
    g.open_channel(C, R, 20, 0)
    return g


@pytest.fixture
def example_graph() -> ChannelGraph:
    return five_node_graph()
