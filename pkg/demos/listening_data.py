"""Load the Last.fm social/listening snapshot and compute centered pair
statistics for a few artists.

Expects the HetRec 2011 Last.fm files (user_friends.dat,
user_artists.dat, artists.dat) in data/hetrec-lastfm/ or under
$ISINGLAB_HETREC.  The dataset is not bundled; grab it from the
grouplens.org HetRec 2011 page.
"""

import os
import sys
from pathlib import Path

import numpy as np

from isinglab import IsingModel
from isinglab.io import item_vector, load_bipartite
from isinglab.stats import graph_distance_statistic

root = Path(os.environ.get("ISINGLAB_HETREC", "data/hetrec-lastfm"))
needed = ["user_friends.dat", "user_artists.dat", "artists.dat"]
if not all((root / f).is_file() for f in needed):
    print(f"dataset not found under {root}/ ({', '.join(needed)})")
    sys.exit(0)

ds = load_bipartite(root / needed[0], root / needed[1], root / needed[2])
print(f"users: {ds.user_count}")
print(f"friendship edges: {ds.user_edges.shape[0]}")
print(f"average degree: {ds.average_degree:.3f}")
print(f"users with truncated lists: {ds.truncated_users}")

# friendship graph with unit couplings just to define adjacency
graph = IsingModel(
    ds.user_count, [(int(u), int(v), 1.0) for u, v in ds.user_edges]
)

print(f"\n{'artist':<24} {'listeners':>9} {'pair stat':>12}")
for name in ("Lady Gaga", "Britney Spears", "Depeche Mode", "Muse"):
    if name not in ds.item_index:
        print(f"{name:<24} {'absent':>9}")
        continue
    fav = item_vector(ds, name)
    center = np.full(ds.user_count, fav.vector.mean())
    stat = graph_distance_statistic(graph, 1, fav.vector, center)
    print(f"{name:<24} {fav.favorite_count:>9} {stat:>12.1f}")

print("\npositive values mean friends favor the artist together more")
print("often than the listener count alone explains")
