"""Walking on the infinite dihedral group.

The group has two generators a and b, each its own inverse, so positions
are alternating words like ababa and the Cayley graph is the bi-infinite
path.  The walker repeats a uniformly remembered past step with
probability p, else takes the opposite letter.
"""

from dihedral_erw import (
    GroupWord,
    MemoryParams,
    reduce_left_multiply,
    signed_location,
    simulate_walk,
    word_metric,
)
from dihedral_erw.montecarlo import replication_stream

# stepping multiplies on the left and cancels or extends the word
w = GroupWord.identity()
print("start at", w)
for g in "abab":
    w = reduce_left_multiply(g, w)
    print(f"after letter {g}: word={str(w):6s} distance={word_metric(w)} "
          f"signed location={signed_location(w):+d}")

print("\nbacktracking: the same letter undoes the move")
print("a * (ababa) =", reduce_left_multiply("a", GroupWord.from_letters("ababa")))

# a memoryless walk (p = 1/2) is the simple symmetric walk in disguise
params = MemoryParams.from_p(0.5)
trace = simulate_walk(params, 20, replication_stream(0, 0))
print("\np = 1/2 sample path, signed locations:")
print(trace.signed_locations().tolist())

# full memory is degenerate: the walker forever repeats its first step,
# and since that step is an involution the distance just flickers
params = MemoryParams.from_p(1.0)
trace = simulate_walk(params, 12, replication_stream(0, 0))
print("\np = 1 distance from the identity (alternates 0, 1):")
print(trace.word_metrics().tolist())
