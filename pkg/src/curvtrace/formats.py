"""File formats: grids, profiles, scenes, mesh caches, paths, reports.

All formats are versioned.  The grid file is a text header followed by
either text or raw little-endian float64 values in row-major (x, y, z)
index order:

    mediagrid 1
    dims NX NY NZ
    origin X Y Z
    spacing SX SY SZ
    quantity c|n|n2
    c0 VALUE
    encoding text|binary
    data
    <payload>

The profile description file is one JSON document with a "kind" tag and
keyword parameters; fluctuation modes are stored explicitly so a file is
reproducible without the generator.  The scene file is a text triangle
soup (one `tri x1 y1 z1 x2 y2 z2 x3 y3 z3 surface_id` per line, optional
`material <id> <tag>` lines).  Mesh caches are NumPy .npz archives with a
format version entry.  Path sets are written as JSON (full structure),
CSV (flat samples), or .npz (compact arrays).
"""

from __future__ import annotations

import json
import numpy as np

from . import media as med
from .mesh import AdaptiveMesh, BoundaryScene

GRID_MAGIC = "mediagrid"
GRID_VERSION = 1
MESH_VERSION = 1
PATHS_VERSION = 1
PROFILE_VERSION = 1


class FormatError(ValueError):
    """Malformed or version-incompatible file."""


# ---------------------------------------------------------------------------
# media grids


def write_grid(path, grid, encoding="binary"):
    if encoding not in ("binary", "text"):
        raise ValueError("encoding must be 'binary' or 'text'")
    header = (
        f"{GRID_MAGIC} {GRID_VERSION}\n"
        f"dims {grid.dims[0]} {grid.dims[1]} {grid.dims[2]}\n"
        f"origin {grid.origin[0]:.17g} {grid.origin[1]:.17g} {grid.origin[2]:.17g}\n"
        f"spacing {grid.spacing[0]:.17g} {grid.spacing[1]:.17g} {grid.spacing[2]:.17g}\n"
        f"quantity {grid.quantity}\n"
        f"c0 {grid.c0:.17g}\n"
        f"encoding {encoding}\n"
        "data\n")
    with open(path, "wb") as f:
        f.write(header.encode())
        flat = np.ascontiguousarray(grid.values, dtype="<f8").ravel()
        if encoding == "binary":
            f.write(flat.tobytes())
        else:
            f.write("\n".join(f"{v:.17g}" for v in flat).encode())
            f.write(b"\n")


def read_grid(path):
    with open(path, "rb") as f:
        blob = f.read()
    nl = blob.find(b"\n")
    first = blob[:nl].decode().split()
    if len(first) != 2 or first[0] != GRID_MAGIC:
        raise FormatError(f"{path}: not a media grid file")
    if int(first[1]) != GRID_VERSION:
        raise FormatError(f"{path}: grid format version {first[1]} unsupported")
    fields = {}
    pos = nl + 1
    while True:
        nl = blob.find(b"\n", pos)
        line = blob[pos:nl].decode().strip()
        pos = nl + 1
        if line == "data":
            break
        key, *rest = line.split()
        fields[key] = rest
    dims = tuple(int(v) for v in fields["dims"])
    origin = [float(v) for v in fields["origin"]]
    spacing = [float(v) for v in fields["spacing"]]
    quantity = fields["quantity"][0]
    c0 = float(fields["c0"][0])
    encoding = fields["encoding"][0]
    count = dims[0] * dims[1] * dims[2]
    if encoding == "binary":
        values = np.frombuffer(blob, dtype="<f8", count=count, offset=pos)
    elif encoding == "text":
        values = np.array(blob[pos:].split(), dtype=float)
        if len(values) != count:
            raise FormatError(f"{path}: expected {count} values, found {len(values)}")
    else:
        raise FormatError(f"{path}: unknown encoding {encoding!r}")
    return med.MediaGrid(dims, origin, spacing, values.reshape(dims), quantity, c0)


# ---------------------------------------------------------------------------
# profile descriptions


def profile_to_dict(profile):
    if isinstance(profile, med.UniformProfile):
        return {"kind": "uniform", "c": profile.c_const}
    if isinstance(profile, med.StratifiedProfile):
        return {"kind": "stratified", "b": profile.b, "c0": profile.c0,
                "zg": profile.zg}
    if isinstance(profile, med.StratifiedFluctuationProfile):
        return {"kind": "stratified+fluctuation",
                "stratified": profile_to_dict(profile.stratified),
                "modes": [{"k": list(map(float, k)), "phase": phi, "amplitude": G}
                          for k, phi, G in profile.fluctuation.modes]}
    if isinstance(profile, med.HotSpotProfile):
        return {"kind": "hotspot", "center": list(map(float, profile.center)),
                "spot_temperature": profile.spot_temperature,
                "ambient_temperature": profile.ambient_temperature,
                "dropoff": profile.dropoff,
                "base": profile_to_dict(profile.base)}
    if isinstance(profile, med.WindOverHillProfile):
        return {"kind": "wind-over-hill",
                "friction_velocity": profile.friction_velocity,
                "von_karman": profile.von_karman, "zg": profile.zg,
                "hill_height": profile.hill_height,
                "hill_radius": profile.hill_radius,
                "influence_thickness": profile.influence_thickness,
                "z0": profile.z0, "direction": profile.direction,
                "hill_center": profile.hill_center, "c_ref": profile.c_ref}
    if isinstance(profile, med.MirageProfile):
        return {"kind": "mirage", "mu0": profile.mu0, "mu1": profile.mu1,
                "beta": profile.beta, "variant": profile.kind}
    if isinstance(profile, med.LinearSpeedProfile):
        return {"kind": "linear-speed", "c_ref": profile.c_ref,
                "g": list(map(float, profile.g))}
    if isinstance(profile, med.LinearSquaredIndexProfile):
        return {"kind": "linear-n2", "n2_ref": profile.n2_ref,
                "g": list(map(float, profile.g)), "c_ref": profile.c_ref}
    raise ValueError(f"cannot serialize profile {type(profile).__name__}")


def profile_from_dict(d):
    kind = d["kind"]
    if kind == "uniform":
        return med.UniformProfile(d["c"])
    if kind == "stratified":
        return med.StratifiedProfile(b=d["b"], c0=d["c0"], zg=d["zg"])
    if kind == "stratified+fluctuation":
        fl = med.FluctuationField(
            [(np.array(m["k"]), m["phase"], m["amplitude"]) for m in d["modes"]])
        return med.StratifiedFluctuationProfile(
            profile_from_dict(d["stratified"]), fl)
    if kind == "hotspot":
        return med.HotSpotProfile(
            center=tuple(d["center"]), spot_temperature=d["spot_temperature"],
            ambient_temperature=d["ambient_temperature"], dropoff=d["dropoff"],
            base=profile_from_dict(d["base"]))
    if kind == "wind-over-hill":
        return med.WindOverHillProfile(
            friction_velocity=d["friction_velocity"], von_karman=d["von_karman"],
            zg=d["zg"], hill_height=d["hill_height"], hill_radius=d["hill_radius"],
            influence_thickness=d["influence_thickness"], z0=d["z0"],
            direction=d["direction"], hill_center=d["hill_center"],
            c_ref=d["c_ref"])
    if kind == "mirage":
        return med.MirageProfile(mu0=d["mu0"], mu1=d["mu1"], beta=d["beta"],
                                 kind=d["variant"])
    if kind == "linear-speed":
        return med.LinearSpeedProfile(c_ref=d["c_ref"], g=tuple(d["g"]))
    if kind == "linear-n2":
        return med.LinearSquaredIndexProfile(n2_ref=d["n2_ref"],
                                             g=tuple(d["g"]), c_ref=d["c_ref"])
    raise FormatError(f"unknown profile kind {kind!r}")


def write_profile(path, profile):
    doc = {"format": "profile", "version": PROFILE_VERSION,
           "profile": profile_to_dict(profile)}
    with open(path, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def read_profile(path):
    with open(path) as f:
        doc = json.load(f)
    if doc.get("format") != "profile":
        raise FormatError(f"{path}: not a profile description file")
    if doc.get("version") != PROFILE_VERSION:
        raise FormatError(f"{path}: profile version {doc.get('version')} unsupported")
    return profile_from_dict(doc["profile"])


# ---------------------------------------------------------------------------
# boundary scenes


def write_scene(path, scene: BoundaryScene):
    with open(path, "w") as f:
        f.write("# curvtrace scene 1\n")
        for sid, tag in sorted(scene.materials.items()):
            f.write(f"material {sid} {tag}\n")
        for tri, sid in zip(scene.triangles, scene.surface_ids):
            coords = " ".join(f"{v:.17g}" for v in tri.ravel())
            f.write(f"tri {coords} {sid}\n")


def read_scene(path):
    tris, ids, mats = [], [], {}
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] == "material":
                mats[int(parts[1])] = parts[2]
            elif parts[0] == "tri":
                if len(parts) != 11:
                    raise FormatError(f"{path}: bad triangle record: {line!r}")
                vals = [float(v) for v in parts[1:10]]
                tris.append(np.array(vals).reshape(3, 3))
                ids.append(int(parts[10]))
            else:
                raise FormatError(f"{path}: unknown record {parts[0]!r}")
    if not tris:
        return BoundaryScene.empty()
    return BoundaryScene(np.array(tris), np.array(ids), mats)


# ---------------------------------------------------------------------------
# mesh cache


def save_mesh(path, mesh: AdaptiveMesh):
    np.savez_compressed(
        path,
        version=np.int64(MESH_VERSION),
        points=mesh.points, values=mesh.values,
        tets=mesh.tets, neighbors=mesh.neighbors, transform=mesh.transform,
        quantity=np.bytes_(mesh.quantity.encode()),
        c0=np.float64(mesh.c0),
        spacing=mesh.spacing if mesh.spacing is not None else np.zeros(0),
        grad=mesh.grad if mesh.grad is not None else np.zeros((0, 3)),
        grad_flags=np.stack([mesh.grad_uniform, mesh.grad_fallback])
        if mesh.grad is not None else np.zeros((2, 0), dtype=bool),
        gradient_method=np.bytes_((mesh.gradient_method or "").encode()),
        linked_offsets=mesh.linked_offsets, linked_tris=mesh.linked_tris,
        scene_tris=mesh.scene.triangles if mesh.scene is not None else np.zeros((0, 3, 3)),
        scene_ids=mesh.scene.surface_ids if mesh.scene is not None else np.zeros(0, dtype=np.int32),
    )


def load_mesh(path):
    with np.load(path) as z:
        version = int(z["version"])
        if version != MESH_VERSION:
            raise FormatError(f"{path}: mesh cache version {version} unsupported")
        mesh = AdaptiveMesh(
            z["points"], z["values"], z["tets"], z["neighbors"], z["transform"],
            quantity=bytes(z["quantity"]).decode(), c0=float(z["c0"]),
            spacing=z["spacing"] if z["spacing"].size else None)
        if z["grad"].size:
            mesh.grad = z["grad"]
            mesh.grad_mag = np.linalg.norm(mesh.grad, axis=1)
            flags = z["grad_flags"]
            mesh.grad_uniform = flags[0].astype(bool)
            mesh.grad_fallback = flags[1].astype(bool)
            mesh.gradient_method = bytes(z["gradient_method"]).decode() or None
        mesh.linked_offsets = z["linked_offsets"]
        mesh.linked_tris = z["linked_tris"]
        if z["scene_tris"].size:
            mesh.scene = BoundaryScene(z["scene_tris"], z["scene_ids"])
    return mesh


# ---------------------------------------------------------------------------
# propagation paths


def paths_to_dict(paths, samples_per_segment=8):
    recs = []
    for p in paths:
        if isinstance(p, Exception):
            recs.append({"error": str(p)})
            continue
        recs.append({
            "launch_direction": list(p.launch_direction),
            "termination": p.termination,
            "total_travel": p.total_travel,
            "hit_point": list(p.hit_point) if p.hit_point else None,
            "polyline": np.asarray(p.polyline(samples_per_segment)).tolist(),
            "events": [{
                "position": list(e.position), "incident": list(e.incident),
                "reflected": list(e.reflected), "surface_id": e.surface_id,
                "travel": e.travel} for e in p.events],
            "meta": {k: v for k, v in p.meta.items() if np.isscalar(v) or isinstance(v, str)},
        })
    return {"format": "paths", "version": PATHS_VERSION, "rays": recs}


def write_paths_json(path, paths, samples_per_segment=8):
    with open(path, "w") as f:
        json.dump(paths_to_dict(paths, samples_per_segment), f)
        f.write("\n")


def write_paths_csv(path, paths, samples_per_segment=8):
    """Flat polyline samples: ray, sample, x, y, z plus per-ray metadata."""
    with open(path, "w") as f:
        f.write("ray,sample,x,y,z,termination,total_travel\n")
        for i, p in enumerate(paths):
            if isinstance(p, Exception):
                continue
            poly = p.polyline(samples_per_segment)
            for j, q in enumerate(poly):
                f.write(f"{i},{j},{q[0]:.10g},{q[1]:.10g},{q[2]:.10g},"
                        f"{p.termination},{p.total_travel:.10g}\n")


def write_events_csv(path, paths):
    with open(path, "w") as f:
        f.write("ray,x,y,z,surface_id,travel\n")
        for i, p in enumerate(paths):
            if isinstance(p, Exception):
                continue
            for e in p.events:
                f.write(f"{i},{e.position[0]:.10g},{e.position[1]:.10g},"
                        f"{e.position[2]:.10g},{e.surface_id},{e.travel:.10g}\n")


def write_paths_npz(path, paths, samples_per_segment=8):
    polys = []
    offsets = [0]
    travels, terms = [], []
    for p in paths:
        if isinstance(p, Exception):
            poly = np.zeros((0, 3))
        else:
            poly = np.asarray(p.polyline(samples_per_segment))
        polys.append(poly)
        offsets.append(offsets[-1] + len(poly))
        travels.append(0.0 if isinstance(p, Exception) else p.total_travel)
        terms.append("error" if isinstance(p, Exception) else p.termination)
    np.savez_compressed(
        path, version=np.int64(PATHS_VERSION),
        points=np.concatenate(polys) if polys else np.zeros((0, 3)),
        offsets=np.array(offsets, dtype=np.int64),
        travels=np.array(travels),
        terminations=np.array(terms, dtype="U16"))


def read_paths_json(path):
    with open(path) as f:
        doc = json.load(f)
    if doc.get("format") != "paths":
        raise FormatError(f"{path}: not a paths file")
    if doc.get("version") != PATHS_VERSION:
        raise FormatError(f"{path}: paths version {doc.get('version')} unsupported")
    return doc["rays"]


# ---------------------------------------------------------------------------
# reports


def write_report_json(path, payload):
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True, default=float)
        f.write("\n")


def write_sweep_csv(path, rows):
    if not rows:
        raise ValueError("empty sweep")
    keys = list(rows[0].keys())
    with open(path, "w") as f:
        f.write(",".join(keys) + "\n")
        for r in rows:
            f.write(",".join(f"{r[k]:.10g}" if isinstance(r[k], float)
                             else str(r[k]) for k in keys) + "\n")


def write_bench_csv(path, report):
    s = report.summary()
    keys = ["n_rays", "t_curved_s", "t_curve_phase_s", "curve_phase_frac",
            "t_intersect_s", "t_stepper_s", "stepper_ds", "curved_err_m",
            "stepper_err_m", "mean_cells_per_ray", "rays_per_sec", "speedup"]
    with open(path, "w") as f:
        f.write(",".join(keys) + "\n")
        f.write(",".join(f"{s[k]:.10g}" if isinstance(s[k], float) else str(s[k])
                         for k in keys) + "\n")
