from hypothesis import strategies as st

from dslicer.agraph import AssignmentGraph

NODE_POOL = (["SRC:Api.s0", "SRC:Api.s1", "SNK:Api.k0", "SNK:Api.k1", "K:0", "N:C"]
             + [f"L:C.m{i % 3}.v{i}" for i in range(10)]
             + ["R:C.m0", "R:C.m1", "F:C.f0", "F:C.f1"])


@st.composite
def graphs(draw, max_edges=40):
    nodes = draw(st.lists(st.sampled_from(NODE_POOL), min_size=1, max_size=len(NODE_POOL),
                          unique=True))
    edges = draw(st.lists(st.tuples(st.sampled_from(nodes), st.sampled_from(nodes)),
                          max_size=max_edges))
    return AssignmentGraph.from_edges(edges, nodes)
