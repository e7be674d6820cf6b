"""Smoke test for the agdmm extension module.

Build and install first:  pip install --no-build-isolation -e crates/py
"""

import json
import random

import agdmm

SPEC = "kind=ag-c1;curve=elliptic:q=13,a=2,b=5;t=2;r=2;s=2;m=2;n=2;N=9;seed=1"


def main():
    f = agdmm.Field(16)
    assert (f.order, f.characteristic) == (16, 2)
    for a in range(1, 16):
        assert f.mul(a, f.inv(a)) == 1
        assert f.add(a, a) == 0

    c = agdmm.Curve("hermitian:u=3")
    assert (c.q, c.genus) == (9, 3)
    assert len(c.places()) == 28
    assert c.gaps() == [1, 2, 5]

    s = agdmm.Scheme(SPEC)
    assert (s.threshold, s.dimension, s.workers) == (6, 5, 9)
    assert agdmm.threshold(SPEC) == 6

    a, b = s.random_inputs(seed=3)
    expected = agdmm.Field(13).matmul(a, b)
    results = s.compute_all(a, b)
    assert len(results) == 9
    survivors = sorted(random.Random(0).sample(range(9), s.threshold))
    decoded = s.decode({w: results[w] for w in survivors})
    assert decoded == expected

    try:
        s.decode({w: results[w] for w in survivors[:-1]})
    except RuntimeError:
        pass
    else:
        raise AssertionError("decoding below threshold should fail")

    record = json.loads(s.run("adversarial:1,4", seed=2))
    assert record["decoded_equals_oracle"] is True

    rows = s.sweep(trials=40)
    assert rows[-1][0] == 9 and rows[-1][3] == 1.0
    assert all(frac == 1.0 for k, _, _, frac in rows if k >= s.threshold)

    try:
        agdmm.Scheme("kind=rs-poly;curve=elliptic:q=5,a=1,b=1;t=2;r=2;s=2;m=2;n=2;N=5")
    except RuntimeError:
        pass
    else:
        raise AssertionError("Reed-Solomon on a genus-1 curve should be rejected")

    print("smoke test ok:", s.summary())


if __name__ == "__main__":
    main()
