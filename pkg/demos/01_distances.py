"""
Sequence distances
==================

LCS and Levenshtein distances between event sequences, normalized by the
summed lengths so that both live in [0, 1].
"""

import numpy as np

from seqnovelty import SymbolTable, lcs_length, levenshtein, normalized_distance, pairwise_matrix

table = SymbolTable()
x = table.encode("open read read write close".split())
y = table.encode("open read write write close".split())

print("lcs length     ", lcs_length(x, y))
print("edit distance  ", levenshtein(x, y))
print("lcs distance   ", normalized_distance("lcs", x, y))
print("lev distance   ", normalized_distance("lev", x, y))

# a small pairwise matrix; the diagonal is zero and the matrix is symmetric
z = table.encode("open close".split())
D = pairwise_matrix("lev", [x, y, z])
print(np.round(np.asarray(D), 3))
