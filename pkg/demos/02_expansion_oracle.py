"""Two routes to every derived symbol, and parity cancellation.

Boundary symbols are parities of earlier symbols, which may themselves
be boundary symbols; unwinding the recursion maps any index to a set of
source indices.  An index reached an even number of times cancels out.
The streaming generator never unwinds anything (it reads its own
emitted prefix), so comparing it against the expansion is a genuine
two-route cross-check.
"""

from galelab import expand_index, f_family, prng_source

h = 2  # block prime 5, parity references at 2q and 3q

for index in (7, 25, 150):
    exp = expand_index(h, index)
    print(f"index {index}: depends on source indices "
          f"{sorted(exp.source_indices)}")

print("\nindex 150 unwinds as 150 -> 60 xor 90 -> (24 xor 36) xor (36 xor 54);")
print("36 appears twice, so source index 29 cancels and only {20, 44} remain.")

inner = prng_source(1)
src = f_family(h, "F", inner)
mismatches = 0
for i in range(20_000):
    parity = 0
    for idx in expand_index(h, i).source_indices:
        parity ^= inner.get(idx)
    if parity != src.get(i):
        mismatches += 1
print(f"\ngenerator vs expansion oracle over 20000 indices: "
      f"{mismatches} mismatches")
