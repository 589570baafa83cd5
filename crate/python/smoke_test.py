"""Quick end-to-end check of the qcmc Python module.

Build and install first:  pip install --no-build-isolation -e crates/python
"""

import math

import qcmc


def main():
    assert qcmc.poly_mul(7, [0, 1], [0, 1, 3]) == [0, 2, 3, 4]
    assert qcmc.poly_inverse(7, [3]) == [4]

    t_max, b_opt = qcmc.bf_threshold(16384, 4, 13)
    assert abs(t_max - 181) <= 0.05 * 181, t_max
    print(f"BF threshold n=16384 d_v=13: {t_max} (b={b_opt})")

    print(f"DCA d_v'=59 p=4096: {qcmc.dca_wf(4, 4096, 59):.2f} bits")
    print(f"log2 C(1) n=16384 d_v'=59: {math.log2(qcmc.complexity_c(16384, 59, 1.0)):.2f}")

    params = qcmc.SystemParams(4, 128, 3, t=2, w_sum=6)
    assert params.m == 1.5 and params.t_prime == 3
    for mode in ("classic", "systematic"):
        sk, pk = qcmc.keygen(params, 42, mode=mode)
        message = b"hello from python"
        ct = pk.encrypt_bytes(message, seed=7)
        assert sk.decrypt_bytes(ct, decoder="bf-variable") == message
        assert qcmc.PrivateKey.from_text(sk.to_text()).to_text() == sk.to_text()
        assert qcmc.PublicKey.from_text(pk.to_text()).to_text() == pk.to_text()
        print(f"{mode}: roundtrip ok, public payload {pk.payload_bits} bits")

    try:
        qcmc.complexity_c(16384, 59, 0.5)
    except qcmc.ParameterError:
        pass
    else:
        raise AssertionError("m < 1 must be rejected")

    report = sk.simulate(t_err=2, trials=64, seed=1, decoder="bf-variable")
    assert 0.0 <= report["cer"] <= 1.0
    print("simulate:", report)
    print("smoke test passed")


if __name__ == "__main__":
    main()
