//! Voxelization against a brute-force binning oracle, and the full encoder
//! against a straight-line 64-bit re-derivation of the attention equations.

mod common;

use radfuse_core::densify::{HybridPoint, PointKind};
use radfuse_core::rng::SplitMix64;
use radfuse_core::tensor::{ParamDecl, ParamStore};
use radfuse_core::voxel::{
    augment, centroid, declare_tavfe_params, tavfe, voxelize, GridSpec, TavfeConfig, VoxelSet,
};
use std::collections::BTreeMap;

fn grid() -> GridSpec {
    GridSpec {
        min: [0.0, -4.0, -1.0],
        max: [8.0, 4.0, 1.0],
        voxel: [0.5, 0.5, 0.25],
    }
}

fn rand_points(rng: &mut SplitMix64, n: usize) -> Vec<HybridPoint> {
    (0..n)
        .map(|_| HybridPoint {
            pos: [
                rng.uniform(-1.0, 9.0),
                rng.uniform(-5.0, 5.0),
                rng.uniform(-1.5, 1.5),
            ],
            attrs: vec![rng.uniform(-2.0, 2.0) as f32, rng.uniform(-2.0, 2.0) as f32],
            class_onehot: vec![1.0, 0.0, 0.0],
            kind: PointKind::Raw,
            source_instance: None,
        })
        .collect()
}

#[test]
fn voxelize_matches_brute_force_binning_oracle() {
    let g = grid();
    let mut rng = SplitMix64::new(2);
    let points = rand_points(&mut rng, 500);
    let n_p = 4;
    let vs = voxelize(&points, &g, n_p);

    // oracle: same drop/truncate rules, separate bookkeeping
    let mut expect: BTreeMap<(i32, i32, i32), Vec<usize>> = BTreeMap::new();
    for (i, p) in points.iter().enumerate() {
        let mut idx = [0i64; 3];
        let mut keep = true;
        for a in 0..3 {
            if p.pos[a] < g.min[a] || p.pos[a] >= g.max[a] {
                keep = false;
                break;
            }
            idx[a] = ((p.pos[a] - g.min[a]) / g.voxel[a]).floor() as i64;
        }
        if keep {
            let slot = expect
                .entry((idx[0] as i32, idx[1] as i32, idx[2] as i32))
                .or_default();
            if slot.len() < n_p {
                slot.push(i);
            }
        }
    }
    assert_eq!(vs.n_voxels(), expect.len());
    let coord_set: BTreeMap<(i32, i32, i32), usize> = vs
        .coords
        .iter()
        .enumerate()
        .map(|(k, c)| ((c[0], c[1], c[2]), k))
        .collect();
    // coordinates unique
    assert_eq!(coord_set.len(), vs.n_voxels());
    for (key, members) in &expect {
        let k = coord_set[key];
        assert_eq!(vs.counts[k], members.len());
        let w = vs.width();
        for (j, &pi) in members.iter().enumerate() {
            let row = &vs.voxel(k)[j * w..(j + 1) * w];
            let feat = points[pi].feature();
            assert_eq!(row, feat.as_slice());
        }
    }
}

#[test]
fn centroid_matches_f64_mean_oracle() {
    let g = grid();
    let mut rng = SplitMix64::new(6);
    let points = rand_points(&mut rng, 200);
    let vs = voxelize(&points, &g, 8);
    for k in 0..vs.n_voxels() {
        let c = centroid(&vs, k);
        let w = vs.width();
        let rows = vs.voxel(k);
        for a in 0..3 {
            let mean: f64 = (0..vs.counts[k])
                .map(|j| rows[j * w + a] as f64)
                .sum::<f64>()
                / vs.counts[k] as f64;
            assert!((c[a] as f64 - mean).abs() < 1e-6);
        }
    }
}

#[test]
fn augment_matches_direct_subtraction_oracle() {
    let g = grid();
    let mut rng = SplitMix64::new(8);
    let points = rand_points(&mut rng, 100);
    let vs = voxelize(&points, &g, 5);
    for k in 0..vs.n_voxels().min(10) {
        let a = augment(&vs, k, &g);
        let c_in = vs.width();
        assert_eq!(a.dims(), &[5, c_in + 6]);
        let c = centroid(&vs, k);
        let gc = g.center_of(vs.coords[k]);
        let rows = vs.voxel(k);
        for j in 0..vs.counts[k] {
            for ax in 0..3 {
                let p = rows[j * c_in + ax];
                let off_center = a.at(&[j, c_in + ax]);
                let off_centroid = a.at(&[j, c_in + 3 + ax]);
                assert!((off_center as f64 - (p as f64 - gc[ax])).abs() < 1e-6);
                assert!((off_centroid - (p - c[ax])).abs() < 1e-6);
            }
        }
    }
}

// ---- straight-line 64-bit reference of the two-block encoder -------------

struct P64 {
    w: Vec<f64>,
    b: Vec<f64>,
    rows: usize,
    cols: usize,
}

fn p64(store: &ParamStore, path: &str) -> P64 {
    let p = store.get(path).unwrap();
    P64 {
        w: p.weight.data().iter().map(|&v| v as f64).collect(),
        b: p.bias.data().iter().map(|&v| v as f64).collect(),
        rows: p.fan_out(),
        cols: p.fan_in(),
    }
}

fn lin64(p: &P64, x: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), p.cols);
    (0..p.rows)
        .map(|o| {
            let mut acc = p.b[o];
            for i in 0..p.cols {
                acc += p.w[o * p.cols + i] * x[i];
            }
            acc
        })
        .collect()
}

fn sigmoid64(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn ta_block_ref(
    store: &ParamStore,
    stage: usize,
    aug: &[Vec<f64>],
    count: usize,
    centroid: [f64; 3],
    gate: bool,
) -> Vec<Vec<f64>> {
    let n_p = aug.len();
    let c = aug[0].len();
    let prefix = |leaf: &str| format!("tavfe.ta{stage}.{leaf}");
    let pw1 = p64(store, &prefix("pw.fc1"));
    let pw2 = p64(store, &prefix("pw.fc2"));
    let cw1 = p64(store, &prefix("cw.fc1"));
    let cw2 = p64(store, &prefix("cw.fc2"));
    let vp = p64(store, &prefix("vox.point"));
    let vc = p64(store, &prefix("vox.chan"));

    let mut pooled_pw = vec![0.0f64; n_p];
    for (j, slot) in pooled_pw.iter_mut().enumerate().take(count) {
        *slot = aug[j].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    }
    let mut pooled_cw = vec![f64::NEG_INFINITY; c];
    for j in 0..count {
        for i in 0..c {
            pooled_cw[i] = pooled_cw[i].max(aug[j][i]);
        }
    }
    let relu = |v: Vec<f64>| v.into_iter().map(|x| x.max(0.0)).collect::<Vec<f64>>();
    let w_pw = lin64(&pw2, &relu(lin64(&pw1, &pooled_pw)));
    let w_cw = lin64(&cw2, &relu(lin64(&cw1, &pooled_cw)));

    let mut weighted = vec![vec![0.0f64; c]; n_p];
    for j in 0..n_p {
        for i in 0..c {
            weighted[j][i] = sigmoid64(w_pw[j] * w_cw[i]) * aug[j][i];
        }
    }
    // voxel weight: point-axis reduction then channel reduction
    let mut per_channel = vec![0.0f64; c + 3];
    for i in 0..c + 3 {
        let mut acc = vp.b[0];
        for j in 0..n_p {
            let val = if i < c { weighted[j][i] } else { centroid[i - c] };
            acc += vp.w[j] * val;
        }
        per_channel[i] = acc;
    }
    let q_raw = lin64(&vc, &per_channel)[0];
    let q = if gate { sigmoid64(q_raw) } else { q_raw };
    weighted
        .into_iter()
        .map(|row| row.into_iter().map(|v| q * v).collect())
        .collect()
}

/// Full 64-bit reference: augment, block 1, linear, block 2, linear, masked
/// channel-wise max over the point axis.
fn tavfe_ref(
    store: &ParamStore,
    cfg: &TavfeConfig,
    vs: &VoxelSet,
    g: &GridSpec,
    k: usize,
) -> Vec<f64> {
    let c_in = vs.width();
    let count = vs.counts[k];
    let rows = vs.voxel(k);
    // centroid and geometric center
    let mut ctr = [0.0f64; 3];
    for j in 0..count {
        for a in 0..3 {
            ctr[a] += rows[j * c_in + a] as f64;
        }
    }
    for a in ctr.iter_mut() {
        *a /= count as f64;
    }
    let ctr32 = [ctr[0] as f32 as f64, ctr[1] as f32 as f64, ctr[2] as f32 as f64];
    let gc = g.center_of(vs.coords[k]);
    let mut aug = vec![vec![0.0f64; c_in + 6]; cfg.n_p];
    for j in 0..count {
        for i in 0..c_in {
            aug[j][i] = rows[j * c_in + i] as f64;
        }
        for a in 0..3 {
            let p = rows[j * c_in + a] as f64;
            aug[j][c_in + a] = (rows[j * c_in + a] - gc[a] as f32) as f64;
            aug[j][c_in + 3 + a] = (rows[j * c_in + a] - ctr32[a] as f32) as f64;
            let _ = p;
        }
    }
    let t1 = ta_block_ref(store, 1, &aug, count, ctr32, cfg.gate_sigmoid);
    let lin1 = p64(store, "tavfe.lin1");
    let mut h: Vec<Vec<f64>> = t1.iter().map(|r| lin64(&lin1, r)).collect();
    for row in h.iter_mut().skip(count) {
        row.fill(0.0);
    }
    let t2 = ta_block_ref(store, 2, &h, count, ctr32, cfg.gate_sigmoid);
    let lin2 = p64(store, "tavfe.lin2");
    let mut f: Vec<Vec<f64>> = t2.iter().map(|r| lin64(&lin2, r)).collect();
    for row in f.iter_mut().skip(count) {
        row.fill(0.0);
    }
    (0..cfg.out)
        .map(|i| {
            (0..count)
                .map(|j| f[j][i])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

#[test]
fn tavfe_matches_straight_line_reference_over_seeds() {
    let g = grid();
    let cfg = TavfeConfig {
        n_p: 5,
        hidden: 12,
        out: 10,
        gate_sigmoid: true,
    };
    let c_in = 10; // 3 + 2 attrs + 3 classes + 2 tag
    let mut decl = ParamDecl::new();
    declare_tavfe_params(&mut decl, &cfg, c_in).unwrap();
    for seed in 0..50u64 {
        let store = ParamStore::init(&decl, seed);
        let mut rng = SplitMix64::new(1000 + seed);
        // 3-voxel toy input: three clusters in separate cells
        let mut points = Vec::new();
        for cell in 0..3 {
            for _ in 0..(1 + rng.index(4)) {
                points.push(HybridPoint {
                    pos: [
                        0.05 + cell as f64 * 2.0 + rng.uniform(0.0, 0.4),
                        -0.85 + rng.uniform(0.0, 0.3),
                        rng.uniform(0.05, 0.2),
                    ],
                    attrs: vec![
                        rng.uniform(-2.0, 2.0) as f32,
                        rng.uniform(-2.0, 2.0) as f32,
                    ],
                    class_onehot: vec![1.0, 0.0, 0.0],
                    kind: PointKind::Raw,
                    source_instance: None,
                });
            }
        }
        let vs = voxelize(&points, &g, cfg.n_p);
        assert_eq!(vs.n_voxels(), 3);
        let out = tavfe(&vs, &g, &store, &cfg).unwrap();
        for k in 0..3 {
            let expect = tavfe_ref(&store, &cfg, &vs, &g, k);
            for i in 0..cfg.out {
                let got = out.features.at(&[k, i]) as f64;
                assert!(
                    (got - expect[i]).abs() < 1e-5,
                    "seed {seed} voxel {k} ch {i}: {got} vs {}",
                    expect[i]
                );
            }
        }
    }
}

#[test]
fn tavfe_no_nan_over_random_voxel_sets() {
    let g = grid();
    let cfg = TavfeConfig {
        n_p: 6,
        hidden: 16,
        out: 12,
        gate_sigmoid: true,
    };
    let mut decl = ParamDecl::new();
    declare_tavfe_params(&mut decl, &cfg, 10).unwrap();
    for seed in 0..100u64 {
        let store = ParamStore::init(&decl, seed);
        let mut rng = SplitMix64::new(seed);
        let points = rand_points(&mut rng, 60);
        let vs = voxelize(&points, &g, cfg.n_p);
        if vs.n_voxels() == 0 {
            continue;
        }
        let out = tavfe(&vs, &g, &store, &cfg).unwrap();
        assert!(out.features.all_finite(), "NaN at seed {seed}");
    }
}
