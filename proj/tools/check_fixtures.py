#!/usr/bin/env python3
"""Independent cross-check of the committed fixtures.

Re-derives the golden data from the documented contracts alone (SplitMix64,
Box-Muller, stream-seed mixing, draw order, TGCK v1 layout) with no access to
the C++ sources, and compares bit-for-bit. A pass means the documentation is
sufficient to reimplement the streams and formats in another language.
"""

import math
import struct
import sys
from pathlib import Path

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
DOMAIN_DATA = 0x64617461
DOMAIN_INIT = 0x696E6974
DOMAIN_SHUFFLE = 0x7368666C


def mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK
        return mix64(self.state)

    def uniform(self) -> float:
        return ((self.next_u64() >> 11) + 1) * 2.0 ** -53


class GaussianStream:
    def __init__(self, seed: int):
        self.base = SplitMix64(seed)
        self.cached = None

    def next(self) -> float:
        if self.cached is not None:
            z, self.cached = self.cached, None
            return z
        u1 = self.base.uniform()
        u2 = self.base.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        angle = 2.0 * math.pi * u2
        self.cached = r * math.sin(angle)
        return r * math.cos(angle)


def stream_seed(base: int, domain: int, t: int) -> int:
    return mix64(((base ^ domain) + GOLDEN * ((t + 1) & MASK)) & MASK)


def bits(x: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", x))[0]


failures = []


def check(ok: bool, what: str) -> None:
    if not ok:
        failures.append(what)
        print(f"  MISMATCH: {what}")


def check_rng_reference(path: Path) -> None:
    rows = path.read_text().splitlines()
    assert rows[0] == "seed,index,u64_hex,gaussian"
    for seed in (1, 7, 42):
        ints = SplitMix64(seed)
        gauss = GaussianStream(seed)
        for i in range(8):
            row = rows.pop(1).split(",")
            check(int(row[0]) == seed and int(row[1]) == i, f"rng row order {row}")
            check(int(row[2], 16) == ints.next_u64(), f"u64 stream seed={seed} i={i}")
            check(bits(float(row[3])) == bits(gauss.next()),
                  f"gaussian stream seed={seed} i={i}")
    print("  rng_reference.csv: streams match")


def parse_tgck(path: Path):
    data = path.read_bytes()
    assert data[:4] == b"TGCK", "bad magic"
    version, dtype_code = struct.unpack_from("<HB", data, 4)
    assert version == 1
    (count,) = struct.unpack_from("<I", data, 7)
    pos = 11
    headers = []
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", data, pos)
        pos += 2
        name = data[pos:pos + name_len].decode("utf-8")
        pos += name_len
        rank = data[pos]
        pos += 1
        dims = struct.unpack_from(f"<{rank}Q", data, pos)
        pos += 8 * rank
        headers.append((name, dims))
    tensors = []
    for name, dims in headers:
        n = math.prod(dims) if dims else 1
        if dtype_code == 0:
            values = struct.unpack_from(f"<{n}f", data, pos)
            pos += 4 * n
        else:
            values = struct.unpack_from(f"<{n}d", data, pos)
            pos += 8 * n
        tensors.append((name, dims, values))
    assert pos == len(data), "trailing bytes"
    return dtype_code, tensors


def check_golden_tgck(root: Path) -> None:
    # Both files hold gaussian draws (seeds 32/64) over tensors
    # w1 (2x3), b1 (2), scale (scalar), in that order.
    for fname, seed, is_f32 in (("golden_f32.tgck", 32, True),
                                ("golden_f64.tgck", 64, False)):
        dtype_code, tensors = parse_tgck(root / fname)
        check(dtype_code == (0 if is_f32 else 1), f"{fname} dtype")
        check([(t[0], t[1]) for t in tensors] ==
              [("w1", (2, 3)), ("b1", (2,)), ("scale", ())], f"{fname} layout")
        g = GaussianStream(seed)
        for name, dims, values in tensors:
            for k, v in enumerate(values):
                expect = g.next()
                if is_f32:
                    expect = struct.unpack("<f", struct.pack("<f", expect))[0]
                check(bits(v) == bits(expect), f"{fname} {name}[{k}]")
    print("  golden TGCK payloads: bit-exact")


def true_params(coeffs, t):
    a, b, c, d = coeffs
    return [((d[j] * t + c[j]) * t + b[j]) * t + a[j] for j in range(len(a))]


def check_synthetic_small(root: Path) -> None:
    import json

    task = json.loads((root / "task.json").read_text())
    dim = task["dim"]
    seed = task["seed"]
    sigma = task["noise_sigma"]
    coeffs = tuple(task["coeffs"][k] for k in "abcd")
    counts = (task["n_train"], task["n_val"], task["n_test"])
    n = sum(counts)

    tp_rows = (root / "true_params.csv").read_text().splitlines()
    assert tp_rows[0].startswith("t,")
    for t in range(1, task["t_count"] + 1):
        fields = tp_rows[t].split(",")
        theta = true_params(coeffs, t)
        check(int(fields[0]) == t, f"true_params row {t}")
        for j in range(dim):
            check(bits(float(fields[1 + j])) == bits(theta[j]),
                  f"true_params t={t} dim={j}")

    for t in range(1, task["t_count"] + 1):
        rows = (root / f"data_{t:05d}.csv").read_text().splitlines()
        assert rows[0] == ",".join(f"x{j+1}" for j in range(dim)) + ",y,split"
        theta = true_params(coeffs, t)
        g = GaussianStream(stream_seed(seed, DOMAIN_DATA, t))
        xs = [g.next() for _ in range(n * dim)]
        for i in range(1, n + 1):
            fields = rows[i].split(",")
            row = xs[(i - 1) * dim:i * dim]
            for j in range(dim):
                check(bits(float(fields[j])) == bits(row[j]),
                      f"data t={t} row={i} x{j}")
            y = sum(row[j] * theta[j] for j in range(dim)) + sigma * g.next()
            check(bits(float(fields[dim])) == bits(y), f"data t={t} row={i} y")
            expected_split = ("train" if i <= counts[0]
                              else "val" if i <= counts[0] + counts[1]
                              else "test")
            check(fields[dim + 1] == expected_split, f"data t={t} row={i} split")

        # The stored checkpoint must parse and carry a dim-sized theta.
        dtype_code, tensors = parse_tgck(root / f"ck_{t:05d}.tgck")
        check(dtype_code == 1 and tensors[0][0] == "theta" and
              tensors[0][1] == (dim,), f"ck_{t:05d}.tgck structure")
    print("  synthetic_small: data, params, and containers match")


def main() -> int:
    root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent.parent / "fixtures"
    print(f"checking fixtures under {root}")
    check_rng_reference(root / "rng_reference.csv")
    check_golden_tgck(root)
    check_synthetic_small(root / "synthetic_small")
    if failures:
        print(f"{len(failures)} mismatches")
        return 1
    print("all fixture cross-checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
