"""Regenerate the bundled model, cluster, scenario and schedule documents.

Run from the repository root::

    python3 tools/build_fixtures.py
"""

import json
from pathlib import Path

from coedge.model import ModelDescriptor, conv, dump_model, fc

DATA = Path(__file__).resolve().parents[1] / "src" / "coedge" / "data"

# Every stride-2 stage halves a 160-row input cleanly, so a 10% row split
# maps to whole rows at every depth.
INPUT = (160, 128, 1)


def c(k, c_in, c_out, s=1):
    return conv(k, c_in, c_out, s, k // 2)


STACKS = {
    "alexnet": [c(5, 1, 24, 2), c(1, 24, 64, 2), c(1, 64, 96), c(1, 96, 256, 2), c(7, 256, 320),
                c(7, 320, 128), c(1, 128, 128, 2), c(1, 128, 128, 2), fc(128, 1024), fc(1024, 1000)],
    "vggf": [c(7, 1, 36, 2), c(5, 36, 80, 2), c(3, 80, 192, 2), c(3, 192, 256), c(3, 256, 320),
             c(3, 320, 256, 2), c(3, 256, 256, 2), fc(256, 1024), fc(1024, 1000)],
    "googlenet": [c(7, 1, 16, 2), c(1, 16, 24), c(3, 24, 64, 2), c(3, 64, 96), c(1, 96, 64),
                  c(5, 64, 160, 2), c(1, 160, 128), c(3, 128, 256, 2), c(1, 256, 256, 2), fc(256, 1000)],
    "mobilenet": [c(3, 1, 8, 2), c(3, 8, 8), c(1, 8, 24), c(3, 24, 24, 2), c(1, 24, 64), c(3, 64, 64),
                  c(1, 64, 96), c(3, 96, 96, 2), c(1, 96, 192), c(3, 192, 192, 2), c(1, 192, 384),
                  c(1, 384, 512, 2), fc(512, 1000)],
}

# profiled cycles per KB of layer input: (Raspberry Pi, Jetson, desktop PC)
RHO = {
    "alexnet": (615e3, 301e3, 282e3),
    "vggf": (563e3, 283e3, 269e3),
    "googlenet": (1568e3, 772e3, 698e3),
    "mobilenet": (461e3, 239e3, 226e3),
}
DEADLINE_MS = {"alexnet": 100, "vggf": 100, "googlenet": 200, "mobilenet": 100}
LINK = 1e6  # bytes/s


def pi(k, rho):
    return {"name": f"pi-{k}", "rho": rho, "f_hz": 1.2e9, "m_kb": 204800,
            "p_c_watts": 3.0, "p_x_watts": 0.1}


def jetson(rho):
    return {"name": "jetson", "rho": rho, "f_hz": 2.0e9, "m_kb": 2097152,
            "p_c_watts": 9.5, "p_x_watts": 0.3}


def pc(rho):
    return {"name": "pc", "rho": rho, "f_hz": 3.6e9, "m_kb": 8388608,
            "p_c_watts": 12.0, "p_x_watts": 0.5}


def write(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n")


def main():
    for name, layers in STACKS.items():
        dump_model(ModelDescriptor(f"{name}-like", INPUT, tuple(layers)), DATA / "models" / f"{name}.json")
        r_pi, r_jet, r_pc = RHO[name]
        # addition order: Pi, Pi, PC, Pi, Pi, Jetson
        devices = [pi(0, r_pi), pi(1, r_pi), pc(r_pc), pi(2, r_pi), pi(3, r_pi), jetson(r_jet)]
        write(DATA / "clusters" / f"six-device-{name}.json",
              {"master": 0, "default_bytes_per_s": LINK, "devices": devices})
        write(DATA / "scenarios" / f"{name}.json",
              {"model": name, "cluster": f"six-device-{name}", "deadline_ms": DEADLINE_MS[name],
               "elem_bytes": 1})
    r_pi, r_jet, _ = RHO["alexnet"]
    write(DATA / "clusters" / "pi-jetson-alexnet.json",
          {"master": 0, "default_bytes_per_s": LINK, "devices": [pi(0, r_pi), jetson(r_jet)]})
    write(DATA / "scenarios" / "pi-jetson-alexnet.json",
          {"model": "alexnet", "cluster": "pi-jetson-alexnet", "deadline_ms": 1000, "elem_bytes": 1})
    write(DATA / "schedules" / "bandwidth-trace.json",
          {"epochs": [{"kb_per_s": r} for r in (1000, 750, 500, 1250, 1500, 1000)]})


if __name__ == "__main__":
    main()
