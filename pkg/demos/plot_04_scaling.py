"""
Analysis time against program size
==================================

Benchmark synthetic programs from 1k to 16k methods and plot time and
reduction against method count.
"""

import sys

from dslicer.testkit import (DEFAULT_CONFIG, plot_corpus, rows_to_csv, run_corpus,
                             scaling_corpus, summarize_corpus)

rows = run_corpus(scaling_corpus(), DEFAULT_CONFIG)
sys.stdout.write(rows_to_csv(rows))
sys.stdout.write(summarize_corpus(rows))

out = sys.argv[1] if len(sys.argv) > 1 else "scaling.svg"
plot_corpus(rows, out)
print("wrote", out)
