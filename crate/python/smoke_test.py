#!/usr/bin/env python3
"""Smoke test for the aqs_sim extension module.

Builds the cdylib if needed, loads it, and drives the register, the pad
inference map, a few protocol runs, and each attack once.

Usage: python3 python/smoke_test.py [--release]
"""

import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def build_and_import(release: bool):
    profile = "release" if release else "debug"
    cmd = ["cargo", "build", "-p", "aqs-python"]
    if release:
        cmd.append("--release")
    subprocess.run(cmd, cwd=REPO, check=True)
    built = REPO / "target" / profile / "libaqs_sim.so"
    if not built.exists():  # e.g. macOS
        built = REPO / "target" / profile / "libaqs_sim.dylib"
    stage = Path(tempfile.mkdtemp(prefix="aqs-sim-"))
    shutil.copy(built, stage / "aqs_sim.so")
    sys.path.insert(0, str(stage))
    import aqs_sim

    return aqs_sim


def check(name, ok, detail=""):
    status = "ok" if ok else "FAIL"
    print(f"[smoke] {name}: {status} {detail}".rstrip())
    if not ok:
        sys.exit(1)


def main():
    release = "--release" in sys.argv[1:]
    aqs = build_and_import(release)

    # Register basics: Bell pair correlations and teleportation.
    reg = aqs.StateRegister(7)
    a, b = reg.make_bell_pair("phi+")
    kind = reg.bell_measure(a, b)
    check("bell eigenstate measurement", kind == "phi+", f"kind={kind}")

    reg = aqs.StateRegister(7)
    alpha, beta = 0.6, 0.8
    msg = reg.alloc_qubit(alpha, beta)
    ah, bh = reg.make_bell_pair("phi+")
    kind = reg.bell_measure(msg, ah)
    x, z, _sign = aqs.teleport_correction(kind)
    reg.apply_pauli(bh, x, z)
    fid = reg.fidelity([bh], [alpha, beta])
    check("teleportation", fid > 1 - 1e-9, f"fidelity={fid:.12f}")

    # Pad roundtrip through the hex-key API.
    reg = aqs.StateRegister(1)
    q = reg.alloc_qubit(1 / math.sqrt(2), 1 / math.sqrt(2))
    reg.qotp_encrypt("9", [q])  # bits 1001 -> (z=1, x=0) on qubit 0
    reg.qotp_decrypt("9", [q])
    fid = reg.fidelity([q], [1 / math.sqrt(2), 1 / math.sqrt(2)])
    check("qotp roundtrip", fid > 1 - 1e-12, f"fidelity={fid:.12f}")

    # The worked inference example: phi+ observed as psi+ means pad (z=0,x=1).
    z, x = aqs.infer_key_pair("phi+", "psi+")
    check("key inference", (z, x) == (False, True), f"(z,x)=({z},{x})")

    # Honest protocol runs.
    for protocol in ["li_bell", "zou", "improved"]:
        out = aqs.run_protocol(protocol, 3, 11)
        check(
            f"honest {protocol}",
            out["outcome"] == "accepted" and out["fidelity"] > 1 - 1e-9,
            f"outcome={out['outcome']} fidelity={out['fidelity']:.9f}",
        )

    # Attacks: recovery and disavowal against the originals, detection by the
    # hardened variant.
    rep = aqs.run_attack("key-extraction", "zou", 4, 5)
    check(
        "key extraction vs zou",
        rep["key_recovery_exact"]
        and rep["disavowal_upheld"]
        and len(rep["recovered_bits"]) == 8,
        f"bits={rep['recovered_bits']}",
    )
    rep = aqs.run_attack("key-extraction", "improved", 4, 5)
    check("key extraction vs improved", rep["detected_at"] == "V1")

    rep = aqs.run_attack("total-break", "li_bell", 2, 5)
    check(
        "total break vs li_bell",
        rep["key_recovery_exact"] and rep["forgery_accepted"],
        f"bits={rep['recovered_bits']}",
    )

    rep = aqs.run_attack("gao-disturbance", "zou", 4, 5)
    check(
        "gao disturbance vs zou",
        rep["disavowal_upheld"] and rep["dispute_ruling"] == "signature_invalid",
    )
    rep = aqs.run_attack("gao-disturbance", "improved", 4, 5)
    check("gao disturbance vs improved", rep["detected_at"] == "V3")

    # Dispute over an honest record.
    ruling = aqs.run_dispute("zou", 3, 13)
    check("honest dispute", ruling == "signature_valid", ruling)

    # Scenario entry point and determinism.
    r1 = aqs.run_scenario("honest", "zou", 4, 7)
    r2 = aqs.run_scenario("honest", "zou", 4, 7)
    check(
        "scenario determinism",
        r1["ok"] and r1["report"] == r2["report"],
    )

    names = [name for name, _ in aqs.list_scenarios()]
    check(
        "scenario catalog",
        names
        == ["dispute", "gao-disturbance", "honest", "key-extraction", "total-break"],
        ",".join(names),
    )

    print("[smoke] all checks passed")


if __name__ == "__main__":
    main()
