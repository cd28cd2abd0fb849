"""
Reducing random programs
========================

Generate programs, slice them, drop the irrelevant methods and confirm the
reduced program yields the same slice.
"""

from dslicer import reduce_program, slice_program
from dslicer.testkit import DEFAULT_CONFIG, GenParams, gen_program

for seed in range(5):
    program = gen_program(GenParams(classes=8, methods_per_class=4, instrs_per_method=8,
                                    source_density=0.05, sink_density=0.05, seed=seed))
    relevant = slice_program(program, DEFAULT_CONFIG).relevant_methods
    reduced, report = reduce_program(program, relevant)
    again = slice_program(reduced, DEFAULT_CONFIG).relevant_methods
    print(f"seed {seed}: kept {len(report.kept):2d}/{program.num_methods()} "
          f"({report.reduction_pct:5.1f}% removed), stable: {again == relevant}")
