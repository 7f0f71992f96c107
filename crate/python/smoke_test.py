"""Smoke test for the pyoneshot extension."""

import json

import pyoneshot


def bits(i, n):
    return format(i, f"0{n}b")


def main():
    scheme = pyoneshot.Scheme(seed=5)
    p = scheme.params
    assert (p.n, p.r, p.k) == (20, 6, 16)

    x = bits(12345, p.n)
    y, u = scheme.p_forward(x)
    assert scheme.p_inverse(y, u) == x
    assert scheme.h(x) == y

    key = scheme.keygen()
    assert key.secret_dim() == p.n - p.r
    sigma, decoded = scheme.sign(key, "101")
    assert key.spent
    assert scheme.verify(key.pk, "101", sigma) == decoded
    assert scheme.p_inverse(key.pk, sigma) is not None
    try:
        scheme.sign(key, "011")
    except RuntimeError as e:
        assert "already been used" in str(e)
    else:
        raise AssertionError("spent key signed twice")

    st = pyoneshot.CosetState(["1100", "0011"], "1000")
    assert st.dim == 2
    dual = st.hadamard()
    assert dual.dim == 2 and dual.contains("1100")
    out, post = st.measure_bits([0, 2], seed=3)
    support = [bits(i, 4) for i in range(16) if post.contains(bits(i, 4))]
    assert len(support) == 1 and support[0][0] + support[0][2] == out
    amps = st.amplitudes()
    assert sum(a * a for a in amps) > 0 and sum(1 for a in amps if a) == 4

    checks = pyoneshot.cpf_selftest()
    assert checks and all(ok for _, ok in checks), checks

    report, passed = pyoneshot.run_experiment("superspace_uniformity", trials=700, seed=1)
    lines = [json.loads(line) for line in report.splitlines()]
    assert lines[0]["type"] == "config" and lines[-1]["type"] == "summary"
    assert passed

    try:
        pyoneshot.Scheme(params=pyoneshot.Params(n=10, r=12, k=4, ell_code=2, msg_len=1))
    except ValueError:
        pass
    else:
        raise AssertionError("invalid params accepted")

    print("ok")


if __name__ == "__main__":
    main()
