"""Smoke test for the polar_bd_py extension module.

Build it first, for example:

    cargo build --release -p polar-bd-py --features extension-module
    cp target/release/libpolar_bd_py.so python/polar_bd_py.so
    python3 python/smoke_test.py
"""

import random

import polar_bd_py as pb


def main():
    code = pb.PolarCode(8, 2, id_len=2)
    assert code.info_positions == [6, 7]
    assert code.id_positions == [3, 5]
    assert code.frozen_positions == [0, 1, 2, 4]

    rng = random.Random(5)
    u = [rng.randrange(2) for _ in range(512)]
    assert pb.polar_transform(pb.polar_transform(u)) == u

    code = pb.PolarCode(256, 57)
    payload = [rng.randrange(2) for _ in range(57)]
    ue = [rng.randrange(2) for _ in range(16)]
    x = code.encode(payload, ue)
    llrs = pb.transmit(x, 4.0, code.rate, seed=1)
    r = code.decode(llrs, list_size=8, expected_id=ue, early_stop=True)
    assert r.payload == payload and r.id_match and not r.stopped_early

    other = [b ^ 1 for b in ue]
    r = code.decode(llrs, list_size=8, expected_id=other, early_stop=True)
    assert r.stopped_early and r.estimated_fraction < 1.0

    long = pb.PolarCode(512, 57)
    candidates = []
    for i in range(44):
        c = code if i < 22 else long
        ident = ue if i == 30 else [rng.randrange(2) for _ in range(16)]
        if i != 30 and ident == ue:
            ident[0] ^= 1
        cw = c.encode([rng.randrange(2) for _ in range(57)], ident)
        candidates.append((c, pb.transmit(cw, 5.0, code.rate, seed=100 + i)))
    index, found, selected = pb.blind_detect(candidates, ue)
    assert index == 30 and 30 in selected and len(selected) == 5

    rows = pb.latency_table()
    assert rows[4][1] == 3617.0

    csv = pb.simulate([2.0], 20, seed=3, n1=64, n2=128, k=16, c1=8, c2=3)
    assert csv.splitlines()[1].startswith("2.0000,20,")

    try:
        pb.PolarCode(12, 2)
    except ValueError:
        pass
    else:
        raise AssertionError("bad length accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
