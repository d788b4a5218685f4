"""Plain CSMA against proactive relaying on a 35-node network.

Run: python demos/network_comparison.py [--reps N]

Both protocols see the same topologies, traffic and fading draws (same
seeds). The report shows aggregate throughput, delivery ratio and, for
the relaying protocol, how often a relay was used and why it often was
not.
"""
import argparse

from coopcsma import ScenarioConfig
from coopcsma import batch as B
from coopcsma import metrics as M

ap = argparse.ArgumentParser()
ap.add_argument("--reps", type=int, default=2)
ap.add_argument("--load", type=float, default=300.0, help="kbit/s per node")
args = ap.parse_args()

base = ScenarioConfig(load_kbps=args.load, duration=1.0, warmup=0.5)
res = {p: B.run_batch(base.replace(protocol=p), args.reps, seed=10) for p in ("csma-csi", "coop-csi")}
for p, r in res.items():
    print(f"{p:9s} throughput {r.mean('throughput_kbps'):8.0f} kbit/s   pdr {r.mean('pdr'):.3f}")

coop = res["coop-csi"].pooled
br = M.coop_phase_breakdown(coop)
print(f"\nrelay used for {100 * br['split']:.1f}% of transmissions")
for k, v in br.items():
    if k.startswith("coop-"):
        print(f"  {k:28s} {100 * v:5.1f}% of relayed packets")
print("relays unavailable because:")
for k, v in M.relay_unavailability_breakdown(coop).items():
    print(f"  {k:28s} {100 * v:5.1f}%")
