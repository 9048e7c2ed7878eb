"""Compare column generation with column-and-constraint generation on two hub sizes."""

from regretopt.benchmark import cells_csv, comparison_table, run_benchmark

cells = run_benchmark(sizes=((1, 1), (3, 1)), alphas=(0.3, 0.7), caps=(60000.0,))
print(comparison_table(cells))
print(cells_csv(cells))
