"""
Slicing a two-class program
===========================

Load the bundled worked example, build its assignment graph and see which
methods carry data from ``Api.source`` to ``Api.sink``.
"""

from dslicer import build_graph, build_hierarchy, load_p1, serialize_program, slice_program

program, config = load_p1()
print(serialize_program(program))

# The graph has one node per local, return value, field, constant and API endpoint.
graph = build_graph(program, build_hierarchy(program), config)
print(f"{len(graph.nodes)} nodes, {len(graph.edges)} edges")

# Forward marks (+) spread from sources, backward marks (-) from sinks.
result = slice_program(program, config)
for node in sorted(graph.nodes):
    print(f"  {result.marking.mark_of(node):2} {node}")

# m1 and m2 each touch one endpoint but no value travels between them.
print("relevant:  ", sorted(f"{c}.{m}" for c, m in result.relevant_methods))
print("irrelevant:", [f"{c}.{m}" for c, m in result.irrelevant_methods(program)])

# One-directional modes keep more methods.
for mode in ("fwd", "bwd"):
    print(mode, sorted(f"{c}.{m}" for c, m in slice_program(program, config, mode).relevant_methods))
