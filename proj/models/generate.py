#!/usr/bin/env python3
"""Writes the bundled model systems and run configurations.

All surface parameters are synthetic (not ab initio). Geometries of propynal,
butynal and pentynal are equilibrium structures; the 2,5-dihydrofuran-like
ring is constructed. Mode vectors come from a distance-dependent spring model
with rigid-body motion projected out, diagonalized per irrep so that every
vector transforms purely.

Re-running this script reproduces the committed files byte for byte.
"""

import json
import math
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent
BOHR_PER_ANGSTROM = 1.0 / 0.529177210903
MASS = {"H": 1.00782503223, "C": 12.0, "O": 15.99491461957}

PROPYNAL = [
    ("C", -1.862526, -0.133679, 0.000000),
    ("C", -0.682909, 0.090546, 0.000004),
    ("C", 0.732185, 0.410499, 0.000000),
    ("O", 1.603232, -0.418473, -0.000001),
    ("H", -2.905643, -0.347742, -0.000014),
    ("H", 0.959289, 1.491328, -0.000007),
]

BUTYNAL = [
    ("C", 1.089017983767, -0.020647637466, 0.053526172906),
    ("C", 2.286527912261, 0.039021831171, 0.069112179550),
    ("C", 3.741575038891, 0.082109399481, 0.128505210575),
    ("C", 4.310739759050, -0.831555794474, 1.206952192531),
    ("O", 5.328047607539, -0.594689393039, 1.793293500111),
    ("H", 0.026374560578, -0.064750812071, 0.031335816833),
    ("H", 4.110560628757, 1.096313662050, 0.297634840723),
    ("H", 4.159987598175, -0.259314486153, -0.827222271525),
    ("H", 3.727168910982, -1.752966769500, 1.404492358297),
]

PENTYNAL = [
    ("C", 3.020901, 0.074904, -0.000289),
    ("C", 1.854777, -0.207971, 0.000218),
    ("C", 0.429999, -0.524857, 0.000273),
    ("C", -0.437276, 0.734654, 0.000052),
    ("C", -1.913872, 0.445780, 0.000031),
    ("O", -2.394628, -0.655918, -0.000254),
    ("H", 4.057159, 0.314276, -0.000474),
    ("H", 0.189870, -1.136984, 0.873894),
    ("H", 0.189832, -1.137299, -0.873112),
    ("H", -0.220485, 1.363715, -0.871927),
    ("H", -0.220438, 1.364131, 0.871700),
    ("H", -2.566089, 1.344445, 0.000242),
]


def dihydrofuran_like():
    """Planar C4O ring in the yz plane, C2 axis along z, CH2 hydrogens above and below."""
    r = 1.23
    ring = [("O", 90.0), ("C", 90.0 - 72.0), ("C", 90.0 + 72.0), ("C", 90.0 - 144.0), ("C", 90.0 + 144.0)]
    atoms = []
    for el, deg in ring:
        t = math.radians(deg)
        atoms.append((el, 0.0, r * math.cos(t), r * math.sin(t)))
    half = math.radians(54.75)
    for _, deg in ring[1:3]:  # CH2 carbons
        t = math.radians(deg)
        u = np.array([0.0, math.cos(t), math.sin(t)])
        c = r * u
        for sign in (1.0, -1.0):
            h = c + 1.09 * (math.cos(half) * u + sign * math.sin(half) * np.array([1.0, 0.0, 0.0]))
            atoms.append(("H", h[0], h[1], h[2]))
    for _, deg in ring[3:5]:  # CH= carbons
        t = math.radians(deg)
        u = np.array([0.0, math.cos(t), math.sin(t)])
        h = (r + 1.08) * u
        atoms.append(("H", h[0], h[1], h[2]))
    return atoms


# ---------------------------------------------------------------------------
# Geometry helpers


def positions(atoms):
    return np.array([[a[1], a[2], a[3]] for a in atoms]) * BOHR_PER_ANGSTROM


def masses(atoms):
    return np.array([MASS[a[0]] for a in atoms])


def reflection(n):
    n = np.asarray(n, float)
    return np.eye(3) - 2.0 * np.outer(n, n)


def half_turn(axis):
    a = np.asarray(axis, float)
    return 2.0 * np.outer(a, a) - np.eye(3)


def permutation(atoms, xyz, m, tol):
    com = masses(atoms) @ xyz / masses(atoms).sum()
    perm = []
    for a in range(len(atoms)):
        image = m @ (xyz[a] - com)
        hits = [b for b in range(len(atoms)) if atoms[b][0] == atoms[a][0] and np.linalg.norm(xyz[b] - com - image) <= tol]
        assert len(hits) == 1, (a, hits)
        perm.append(hits[0])
    return perm


def symmetrized(atoms, xyz, ops):
    """Group average of the geometry about its center of mass."""
    com = masses(atoms) @ xyz / masses(atoms).sum()
    out = np.zeros_like(xyz)
    for m, perm in ops:
        for a in range(len(atoms)):
            out[perm[a]] += m @ (xyz[a] - com)
    return out / len(ops)


def representation(m, perm):
    n = len(perm)
    g = np.zeros((3 * n, 3 * n))
    for a, b in enumerate(perm):
        g[3 * b : 3 * b + 3, 3 * a : 3 * a + 3] = m
    return g


def spring_hessian(atoms, xyz):
    """Mass-weighted Cartesian Hessian of pair springs k(r) plus a weak tether."""
    n = len(atoms)
    h = np.zeros((3 * n, 3 * n))
    for a in range(n):
        for b in range(a + 1, n):
            d = xyz[b] - xyz[a]
            r = np.linalg.norm(d)
            k = 0.5 * math.exp(-1.1 * (r - 2.2)) + (0.07 if "H" in (atoms[a][0], atoms[b][0]) else 0.0) / r
            u = np.outer(d, d) / (r * r)
            block = k * u + 0.004 * k * (np.eye(3) - u)
            for i, j, s in ((a, a, 1), (b, b, 1), (a, b, -1), (b, a, -1)):
                h[3 * i : 3 * i + 3, 3 * j : 3 * j + 3] += s * block
    h += 0.01 * np.eye(3 * n)
    w = np.repeat(1.0 / np.sqrt(masses(atoms)), 3)
    return h * np.outer(w, w)


def rigid_basis(atoms, xyz):
    m = masses(atoms)
    com = m @ xyz / m.sum()
    sq = np.repeat(np.sqrt(m), 3)
    vecs = []
    for k in range(3):
        t = np.zeros(3 * len(atoms))
        t[k::3] = 1.0
        vecs.append(t * sq)
    for k in range(3):
        axis = np.eye(3)[k]
        r = np.array([np.cross(axis, x - com) for x in xyz]).ravel()
        vecs.append(r * sq)
    q, _ = np.linalg.qr(np.array(vecs).T)
    return q


def symmetry_modes(atoms, xyz, ops, table, freq_range):
    """Vibrational modes per irrep, sorted by frequency. Returns (freqs, vectors, irreps)."""
    h = spring_hessian(atoms, xyz)
    q = rigid_basis(atoms, xyz)
    proj_vib = np.eye(len(h)) - q @ q.T
    h = proj_vib @ h @ proj_vib
    reps = [representation(m, p) for m, p in ops]
    found = []
    for name, chars in table:
        proj = sum(c * g for c, g in zip(chars, reps)) / len(reps)
        proj = proj_vib @ proj
        u, s, _ = np.linalg.svd(proj)
        basis = u[:, s > 0.5]
        if basis.shape[1] == 0:
            continue
        evals, evecs = np.linalg.eigh(basis.T @ h @ basis)
        for lam, v in zip(evals, evecs.T):
            if lam > 1e-8:
                vec = basis @ v
                k = int(np.argmax(np.abs(vec)))
                if vec[k] < 0:
                    vec = -vec
                found.append((lam, vec, name))
    found.sort(key=lambda t: t[0])
    lam = np.array([f[0] for f in found])
    lo, hi = freq_range
    s = np.sqrt(lam)
    freqs = lo + (hi - lo) * (s - s.min()) / (s.max() - s.min())
    vecs = np.array([f[1] for f in found]).T
    return [round(float(f), 1) for f in freqs], vecs, [f[2] for f in found]


def motion_labels(freqs, irreps, prime="A″", carbonyl=None):
    labels = []
    for j, (f, irr) in enumerate(zip(freqs, irreps)):
        if carbonyl is not None and j == carbonyl:
            labels.append("C=O stretching")
        elif f > 2800:
            labels.append("C-H stretching")
        elif f > 2000:
            labels.append("C#C stretching")
        elif irr == prime:
            labels.append("out-of-plane")
        elif f > 1000:
            labels.append("in-plane bending")
        else:
            labels.append("skeletal deformation")
    return labels


def round_list(xs, digits=10):
    return [float(f"{x:.{digits}g}") for x in xs]


def system_json(freqs, labels, irreps, atoms=None, xyz=None, vecs=None):
    modes = []
    for f, l, i in zip(freqs, labels, irreps):
        m = {"frequency_cm1": f, "label": l}
        if i is not None:
            m["irrep"] = i
        modes.append(m)
    out = {"modes": modes}
    if atoms is not None:
        out["geometry"] = {
            "atoms": [
                {"element": a[0], "mass_amu": MASS[a[0]], "position_bohr": round_list(x, 12)}
                for a, x in zip(atoms, xyz)
            ],
            "mode_vectors": [round_list(v, 15) for v in vecs.T],
        }
    return out


def orthonormal_rounding_safe(vecs):
    """Re-orthonormalize after rounding to 15 digits so the 1e-10 check holds."""
    q, r = np.linalg.qr(vecs)
    return q * np.sign(np.diag(r))


# ---------------------------------------------------------------------------
# Surfaces (scaled coordinates, hartree)

CM1 = 4.556335252912e-6


def symmetric_surface(rng, omega, sym_mask, energy, shift_scale, anharmonic):
    """Gradient on symmetric modes only; Hessian block-diagonal between the
    symmetric and antisymmetric sets; cubic/quartic terms on symmetric modes."""
    d = len(omega)
    w = np.asarray(omega)
    shift = np.where(sym_mask, rng.uniform(-shift_scale, shift_scale, d), 0.0)
    grad = -w * shift
    hess = np.diag(w * (1.0 + rng.uniform(-0.08, 0.08, d)))
    for i in range(d):
        for j in range(i + 1, d):
            if sym_mask[i] == sym_mask[j]:
                c = rng.uniform(-0.015, 0.015) * math.sqrt(w[i] * w[j])
                hess[i, j] = hess[j, i] = c
    block = {"type": "quartic" if anharmonic else "quadratic", "energy": energy, "gradient": round_list(grad, 12),
             "hessian": [round_list(r, 12) for r in hess]}
    if anharmonic:
        block["cubic"] = round_list(np.where(sym_mask, -0.004 * w, 0.0), 12)
        block["quartic"] = round_list(np.where(sym_mask, 0.0015 * w, 0.0), 12)
    assert np.all(np.linalg.eigvalsh(hess) > 0)
    return block


def write(name, obj):
    path = HERE / name
    path.write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def cs_ops(atoms, xyz, tol):
    return [(np.eye(3), list(range(len(atoms)))), (reflection([0, 0, 1]), permutation(atoms, xyz, reflection([0, 0, 1]), tol))]


def planar_molecule(stem, atoms, tol, freq_range, seed, states, carbonyl_irrep_index=None):
    xyz = positions(atoms)
    ops = cs_ops(atoms, xyz, tol)
    sym_xyz = symmetrized(atoms, xyz, ops)
    freqs, vecs, irreps = symmetry_modes(atoms, sym_xyz, ops, [("A′", [1, 1]), ("A″", [1, -1])], freq_range)
    vecs = orthonormal_rounding_safe(vecs)
    # the highest symmetric mode below the C-H region plays the carbonyl stretch
    carbonyl = max(j for j, (f, i) in enumerate(zip(freqs, irreps)) if i == "A′" and 1500 < f < 2000) if any(
        i == "A′" and 1500 < f < 2000 for f, i in zip(freqs, irreps)) else None
    labels = motion_labels(freqs, irreps, carbonyl=carbonyl)
    write(f"{stem}.system.json", system_json(freqs, labels, irreps, atoms, xyz, vecs))

    rng = np.random.default_rng(seed)
    omega = np.array(freqs) * CM1
    mask = np.array([i == "A′" for i in irreps])
    surfaces = {}
    for sid, energy in states:
        surfaces[sid] = symmetric_surface(rng, omega, mask, energy, 0.5, anharmonic=True)
    return freqs, irreps, surfaces


def main():
    amp = 1.0 / math.sqrt(2.0)

    # -- displaced harmonic: one mode, minima offset c = 1
    w = 1500.0
    write("displaced-harmonic.system.json", system_json([w], ["model mode"], [None]))
    wh = w * CM1
    write("displaced-harmonic.json", {
        "description": "Synthetic 1-mode model: two harmonic surfaces with the neutral frequency, minima offset by c = 1.",
        "system": "displaced-harmonic.system.json",
        "states": [{"id": "I", "amplitude": [amp, 0.0]}, {"id": "J", "amplitude": [amp, 0.0]}],
        "surfaces": {
            "I": {"type": "quadratic", "energy": 0.0, "center": [0.0], "hessian": [[wh]]},
            "J": {"type": "quadratic", "energy": 0.05, "center": [1.0], "hessian": [[wh]]},
        },
        "propagation": {"dt_fs": 0.25, "n_steps": 180, "variant": "thawed"},
        "analysis": {
            "groupings": [{"type": "position_momentum"}],
            "observable": {"states": ["I", "J"], "matrix": [[0.0, 1.0], [1.0, 0.0]]},
        },
        "oracle": {"grid": {"axes": [{"min": -12.0, "max": 14.0, "points": 512}], "dt_fs": 0.00625, "n_steps": 4000,
                            "output_every": 40}},
    })

    # -- gradient difference: same zero Hessian, different gradients
    write("gradient-difference.system.json", system_json([w], ["model mode"], [None]))
    write("gradient-difference.json", {
        "description": "Synthetic 1-mode model: linear surfaces that differ only in their gradient.",
        "system": "gradient-difference.system.json",
        "states": [{"id": "I", "amplitude": [amp, 0.0]}, {"id": "J", "amplitude": [amp, 0.0]}],
        "surfaces": {
            "I": {"type": "quadratic", "energy": 0.0, "gradient": [0.0], "hessian": [[0.0]]},
            "J": {"type": "quadratic", "energy": 0.05, "gradient": [-0.5 * wh], "hessian": [[0.0]]},
        },
        "propagation": {"dt_fs": 0.25, "n_steps": 100, "variant": "frozen"},
        "analysis": {"groupings": [{"type": "position_momentum"}]},
    })

    # -- Morse pair, weakly anharmonic
    alpha = 0.2
    depth = wh / (2.0 * alpha * alpha)
    write("morse.system.json", system_json([w], ["model mode"], [None]))
    write("morse.json", {
        "description": "Synthetic 1-mode model: two Morse surfaces with minima at +-0.5 (scaled units).",
        "system": "morse.system.json",
        "states": [{"id": "I", "amplitude": [amp, 0.0]}, {"id": "J", "amplitude": [amp, 0.0]}],
        "surfaces": {
            "I": {"type": "morse", "energy": 0.0, "depth": [depth], "stiffness": [alpha], "center": [0.5]},
            "J": {"type": "morse", "energy": 0.03, "depth": [depth], "stiffness": [alpha], "center": [-0.5]},
        },
        "propagation": {"dt_fs": 0.25, "n_steps": 40, "variant": "thawed"},
        "oracle": {"grid": {"axes": [{"min": -14.0, "max": 18.0, "points": 512}], "dt_fs": 0.0125, "n_steps": 800,
                            "output_every": 20}},
    })

    # -- 2-D rotated-Hessian (Duschinsky-style) quadratic pair
    w2 = [1100.0, 1700.0]
    write("duschinsky-2d.system.json", system_json(w2, ["mode a", "mode b"], [None, None]))
    om = np.array(w2) * CM1

    def rotated(theta, scale):
        c, s = math.cos(theta), math.sin(theta)
        rot = np.array([[c, -s], [s, c]])
        return rot @ np.diag(om * scale) @ rot.T

    write("duschinsky-2d.json", {
        "description": "Synthetic 2-mode model: quadratic surfaces with rotated Hessian eigenbases.",
        "system": "duschinsky-2d.system.json",
        "states": [{"id": "I", "amplitude": [amp, 0.0]}, {"id": "J", "amplitude": [amp, 0.0]}],
        "surfaces": {
            "I": {"type": "quadratic", "energy": 0.0, "gradient": round_list(-om * [0.6, -0.3], 12),
                  "hessian": [round_list(r, 12) for r in rotated(0.35, np.array([0.9, 1.1]))]},
            "J": {"type": "quadratic", "energy": 0.04, "gradient": round_list(-om * [-0.4, 0.5], 12),
                  "hessian": [round_list(r, 12) for r in rotated(-0.25, np.array([1.15, 0.85]))]},
        },
        "propagation": {"dt_fs": 0.25, "n_steps": 40, "variant": "thawed"},
        "oracle": {"grid": {"axes": [{"min": -9.0, "max": 9.0, "points": 64}, {"min": -9.0, "max": 9.0, "points": 64}],
                            "dt_fs": 0.0025, "n_steps": 4000, "output_every": 100}},
    })

    # -- propynal-like: 12 modes, 9A′ + 3A″
    _, _, surf = planar_molecule("propynal-like", PROPYNAL, 0.01, (180.0, 3330.0), 11, [("D1", 0.0), ("D3", 0.06)])
    write("propynal-like.json", {
        "description": "Propynal equilibrium geometry with synthetic spring-model modes and synthetic cationic surfaces.",
        "system": "propynal-like.system.json",
        "states": [{"id": "D1", "amplitude": [amp, 0.0]}, {"id": "D3", "amplitude": [amp, 0.0]}],
        "surfaces": surf,
        "propagation": {"dt_fs": 0.25, "n_steps": 100, "variant": "thawed"},
        "analysis": {"groupings": [{"type": "by_irrep"}, {"type": "position_momentum"}, {"type": "by_label"}]},
        "symmetry": {"point_group": "Cs", "tolerance_bohr": 0.001},
    })

    # -- pentynal-like: 30 modes, 19A′ + 11A″
    _, _, surf = planar_molecule("pentynal-like", PENTYNAL, 0.01, (120.0, 3330.0), 23, [("D1", 0.0), ("D3", 0.07)])
    write("pentynal-like.json", {
        "description": "Pentynal equilibrium geometry with synthetic spring-model modes and synthetic cationic surfaces.",
        "system": "pentynal-like.system.json",
        "states": [{"id": "D1", "amplitude": [amp, 0.0]}, {"id": "D3", "amplitude": [amp, 0.0]}],
        "surfaces": surf,
        "propagation": {"dt_fs": 0.25, "n_steps": 100, "variant": "thawed"},
        "analysis": {
            "groupings": [
                {"type": "by_irrep"},
                {"type": "position_momentum"},
                {"type": "by_label"},
                {"type": "subset", "name": "C=O stretching", "labels": ["C=O stretching"], "rest": "other modes"},
            ],
            "observable": {"states": ["D1", "D3"], "matrix": [[1.0, 0.5], [0.5, -1.0]]},
        },
        "symmetry": {"point_group": "Cs", "tolerance_bohr": 0.01},
    })

    # -- butynal: twisted aldehyde, no mirror plane (classification must fail for Cs)
    bxyz = positions(BUTYNAL)
    write("butynal.system.json", {
        "modes": [{"frequency_cm1": 1000.0 + 100.0 * j} for j in range(3)],
        "geometry": {"atoms": [{"element": a[0], "mass_amu": MASS[a[0]], "position_bohr": round_list(x, 12)}
                               for a, x in zip(BUTYNAL, bxyz)]},
    })
    write("butynal-classify.json", {
        "description": "Butynal equilibrium geometry; the twisted aldehyde group breaks the mirror plane.",
        "system": "butynal.system.json",
        "symmetry": {"point_group": "Cs", "tolerance_bohr": 0.01},
    })

    # -- 2,5-dihydrofuran-like: 27 modes, C2v
    atoms = dihydrofuran_like()
    xyz = positions(atoms)
    tol = 1e-6
    ops = [(np.eye(3), list(range(len(atoms))))]
    for m in (half_turn([0, 0, 1]), reflection([0, 1, 0]), reflection([1, 0, 0])):
        ops.append((m, permutation(atoms, xyz, m, tol)))
    table = [("A1", [1, 1, 1, 1]), ("A2", [1, 1, -1, -1]), ("B1", [1, -1, 1, -1]), ("B2", [1, -1, -1, 1])]
    freqs, vecs, irreps = symmetry_modes(atoms, xyz, ops, table, (240.0, 3150.0))
    vecs = orthonormal_rounding_safe(vecs)
    labels = motion_labels(freqs, irreps, prime=None)
    write("dihydrofuran-like.system.json", system_json(freqs, labels, irreps, atoms, xyz, vecs))
    rng = np.random.default_rng(31)
    omega = np.array(freqs) * CM1
    mask = np.array([i == "A1" for i in irreps])
    sym_blocks = {name: np.array([i == name for i in irreps]) for name, _ in table}
    surfaces = {}
    for sid, energy in (("D1", 0.0), ("D2", 0.05)):
        s = symmetric_surface(rng, omega, mask, energy, 0.4, anharmonic=False)
        hess = np.array(s["hessian"])
        for a in sym_blocks.values():
            for b in sym_blocks.values():
                if a is not b:
                    hess[np.ix_(a, b)] = 0.0
        s["hessian"] = [round_list(r, 12) for r in hess]
        surfaces[sid] = s
    write("dihydrofuran-like.json", {
        "description": "Constructed C2v ring geometry with synthetic spring-model modes and synthetic cationic surfaces.",
        "system": "dihydrofuran-like.system.json",
        "states": [{"id": "D1", "amplitude": [amp, 0.0]}, {"id": "D2", "amplitude": [amp, 0.0]}],
        "surfaces": surfaces,
        "propagation": {"dt_fs": 0.25, "n_steps": 100, "variant": "thawed"},
        "analysis": {"groupings": [{"type": "by_irrep"}, {"type": "position_momentum"}]},
        "symmetry": {"point_group": "C2v", "tolerance_bohr": 0.001},
    })


if __name__ == "__main__":
    main()
