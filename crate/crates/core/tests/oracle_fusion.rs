//! Scene-level fusion against group-by, collapse-identity, straight-line
//! equation, and distance-scan oracles.

mod common;

use common::{rand_pyramid, rand_tensor, ref_deform_fuse, ref_project, vod_calibration};
use radfuse_core::boxes::Box3D;
use radfuse_core::rng::SplitMix64;
use radfuse_core::scene_fusion::{
    declare_deform_params, declare_downsample_params, deform_attend, hsfp, hsfp_prefix,
    multiscale_downsample, qgslf_block, roi_grid_pool, DeformConfig, DeformParams, Proposal,
    SparseVoxelFeatures,
};
use radfuse_core::tensor::{ParamDecl, ParamStore};
use radfuse_core::voxel::VoxelFeatures;
use std::collections::HashMap;

fn rand_voxel_features(rng: &mut SplitMix64, n: usize, c: usize) -> VoxelFeatures {
    let mut coords = Vec::new();
    let mut centroids = Vec::new();
    let mut counts = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    while coords.len() < n {
        let cd = [
            rng.index(16) as i32,
            rng.index(16) as i32,
            rng.index(8) as i32,
        ];
        if !seen.insert(cd) {
            continue;
        }
        coords.push(cd);
        centroids.push([
            cd[0] as f64 * 0.5 + rng.uniform(0.0, 0.5),
            cd[1] as f64 * 0.5 + rng.uniform(0.0, 0.5),
            cd[2] as f64 * 0.25 + rng.uniform(0.0, 0.25),
        ]);
        counts.push(1 + rng.index(5));
    }
    VoxelFeatures {
        features: rand_tensor(rng, &[n, c], 1.5),
        coords,
        centroids,
        counts,
    }
}

#[test]
fn downsample_matches_group_by_oracle() {
    let mut rng = SplitMix64::new(31);
    let c_in = 6;
    let c_out = 5;
    let vf = rand_voxel_features(&mut rng, 40, c_in);
    let mut decl = ParamDecl::new();
    declare_downsample_params(&mut decl, c_in, c_out).unwrap();
    let store = ParamStore::init(&decl, 77);
    let levels = multiscale_downsample(&vf, &store).unwrap();
    assert_eq!(levels.len(), 4);
    for (li, s) in [1i32, 2, 4, 8].iter().enumerate() {
        let level = &levels[li];
        assert_eq!(level.scale, *s as u32);
        // oracle: independent grouping with a HashMap
        let mut groups: HashMap<(i32, i32, i32), Vec<usize>> = HashMap::new();
        for (k, cd) in vf.coords.iter().enumerate() {
            groups
                .entry((cd[0].div_euclid(*s), cd[1].div_euclid(*s), cd[2].div_euclid(*s)))
                .or_default()
                .push(k);
        }
        assert_eq!(level.len(), groups.len());
        let w = store.get(&format!("msds.x{s}")).unwrap();
        for (g, cd) in level.coords.iter().enumerate() {
            let members = &groups[&(cd[0], cd[1], cd[2])];
            // channel-wise max then the per-level linear, in f64
            let mut maxed = vec![f64::NEG_INFINITY; c_in];
            let mut csum = [0.0f64; 3];
            let mut total = 0usize;
            for &k in members {
                for i in 0..c_in {
                    maxed[i] = maxed[i].max(vf.features.at(&[k, i]) as f64);
                }
                for a in 0..3 {
                    csum[a] += vf.centroids[k][a] * vf.counts[k] as f64;
                }
                total += vf.counts[k];
            }
            for a in 0..3 {
                let expect = csum[a] / total as f64;
                assert!((level.centroids[g][a] - expect).abs() < 1e-9);
            }
            assert_eq!(level.counts[g], total);
            let wd = w.weight.data();
            let bd = w.bias.data();
            for o in 0..c_out {
                let mut acc = bd[o] as f64;
                for i in 0..c_in {
                    acc += wd[o * c_in + i] as f64 * maxed[i];
                }
                let got = level.features.at(&[g, o]) as f64;
                assert!((got - acc).abs() < 1e-5, "{got} vs {acc}");
            }
        }
    }
}

fn deform_store(
    prefix: &str,
    c_q: usize,
    c_img: usize,
    cfg: &DeformConfig,
    n_levels: usize,
    seed: u64,
) -> ParamStore {
    let mut decl = ParamDecl::new();
    declare_deform_params(&mut decl, prefix, c_q, c_img, cfg, n_levels, 2 * c_q).unwrap();
    ParamStore::init(&decl, seed)
}

#[test]
fn offset_collapse_identity_reduces_to_bilinear_sample() {
    // M = 1, n_I = 1, n_s = 1, zero offsets, identity value/output
    let cfg = DeformConfig { heads: 1, points: 1 };
    let c = 6;
    let mut rng = SplitMix64::new(8);
    let pyr = rand_pyramid(&mut rng, &[4.0], (64, 96), c);
    let mut store = deform_store("blk", c, c, &cfg, 1, 3);
    store.zero_out("blk.offset");
    store.set_identity("blk.value");
    store.set_identity("blk.out");
    let params = DeformParams::fetch(&store, "blk").unwrap();
    for _ in 0..30 {
        let q: Vec<f32> = (0..c).map(|_| rng.uniform(-1.0, 1.0) as f32).collect();
        let (u, v) = (rng.uniform(0.0, 90.0), rng.uniform(0.0, 60.0));
        let out = deform_attend(&q, Some((u, v)), &pyr, &params, &cfg).unwrap();
        let expect =
            radfuse_core::tensor::bilinear_sample(&pyr.levels[0].features, u / 4.0, v / 4.0);
        for i in 0..c {
            assert!(
                (out.enhanced[i] - expect[i]).abs() < 1e-5,
                "{} vs {}",
                out.enhanced[i],
                expect[i]
            );
        }
        // single slot: weight is exactly 1
        assert!((out.attn.data()[0] - 1.0).abs() < 1e-6);
    }
}

#[test]
fn attention_weights_sum_to_one_per_head() {
    let cfg = DeformConfig { heads: 4, points: 4 };
    let c = 32;
    let mut rng = SplitMix64::new(11);
    let pyr = rand_pyramid(&mut rng, &[4.0, 8.0, 16.0, 32.0, 64.0], (128, 160), 16);
    let store = deform_store("blk", c, 16, &cfg, 5, 21);
    let params = DeformParams::fetch(&store, "blk").unwrap();
    for _ in 0..20 {
        let q: Vec<f32> = (0..c).map(|_| rng.uniform(-2.0, 2.0) as f32).collect();
        let out = deform_attend(&q, Some((40.0, 30.0)), &pyr, &params, &cfg).unwrap();
        assert_eq!(out.attn.dims(), &[4, 5, 4]);
        for m in 0..4 {
            let s: f64 = out.attn.data()[m * 20..(m + 1) * 20]
                .iter()
                .map(|&v| v as f64)
                .sum();
            assert!((s - 1.0).abs() < 1e-6, "head {m} sums to {s}");
        }
    }
}

#[test]
fn qgslf_matches_straight_line_equation_oracle() {
    // 2-voxel, 2-level toy case in f64
    let cfg = DeformConfig { heads: 2, points: 3 };
    let c = 8;
    let c_img = 5;
    let cal = vod_calibration();
    for seed in 0..20u64 {
        let mut rng = SplitMix64::new(900 + seed);
        let pyr = rand_pyramid(&mut rng, &[4.0, 8.0], (120, 160), c_img);
        let store = deform_store("hsfp.x4", c, c_img, &cfg, 2, seed);
        let x = SparseVoxelFeatures {
            features: rand_tensor(&mut rng, &[2, c], 1.0),
            coords: vec![[0, 0, 0], [1, 1, 0]],
            centroids: vec![
                [rng.uniform(5.0, 30.0), rng.uniform(-8.0, 8.0), rng.uniform(-1.0, 1.0)],
                [rng.uniform(5.0, 30.0), rng.uniform(-8.0, 8.0), rng.uniform(-1.0, 1.0)],
            ],
            counts: vec![2, 3],
            scale: 4,
        };
        let fused = qgslf_block(&x, &pyr, &cal, &store, "hsfp.x4", &cfg).unwrap();
        for k in 0..2 {
            let reference = ref_project(x.centroids[k], &cal);
            let expect = ref_deform_fuse(
                &store,
                "hsfp.x4",
                x.row(k),
                reference,
                &pyr,
                cfg.heads,
                cfg.points,
            );
            for i in 0..c {
                let got = fused.features.at(&[k, i]) as f64;
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
fn dropped_centroids_still_fuse_with_zero_enhancement() {
    let cfg = DeformConfig { heads: 2, points: 2 };
    let c = 8;
    let cal = vod_calibration();
    let mut rng = SplitMix64::new(5);
    let pyr = rand_pyramid(&mut rng, &[4.0], (64, 64), 4);
    let store = deform_store("hsfp.x4", c, 4, &cfg, 1, 9);
    // centroid behind the camera: radar x < 0 maps to negative depth
    let x = SparseVoxelFeatures {
        features: rand_tensor(&mut rng, &[1, c], 1.0),
        coords: vec![[0, 0, 0]],
        centroids: vec![[-5.0, 0.0, 0.0]],
        counts: vec![1],
        scale: 4,
    };
    let fused = qgslf_block(&x, &pyr, &cal, &store, "hsfp.x4", &cfg).unwrap();
    // oracle with a zero enhancement
    let expect = ref_deform_fuse(&store, "hsfp.x4", x.row(0), None, &pyr, 2, 2);
    for i in 0..c {
        assert!((fused.features.at(&[0, i]) as f64 - expect[i]).abs() < 1e-5);
    }
}

#[test]
fn roi_pool_matches_distance_scan_oracle() {
    let mut rng = SplitMix64::new(44);
    let c = 4;
    let n = 30;
    let feats = SparseVoxelFeatures {
        features: rand_tensor(&mut rng, &[n, c], 2.0),
        coords: vec![[0, 0, 0]; n],
        centroids: (0..n)
            .map(|_| {
                [
                    rng.uniform(-4.0, 4.0),
                    rng.uniform(-4.0, 4.0),
                    rng.uniform(-1.5, 1.5),
                ]
            })
            .collect(),
        counts: vec![1; n],
        scale: 1,
    };
    let g = 4;
    let proposals = vec![
        Proposal {
            box3d: Box3D::new([0.5, -0.5, 0.0], [4.0, 2.5, 2.0], 0.35),
            score: 1.0,
            class: 0,
        },
        Proposal {
            box3d: Box3D::new([-1.0, 1.5, 0.2], [2.0, 2.0, 1.0], -0.9),
            score: 0.5,
            class: 1,
        },
    ];
    let pooled = roi_grid_pool(&feats, &proposals, g);
    assert_eq!(pooled.dims(), &[2, g * g * g * c]);
    for (pi, p) in proposals.iter().enumerate() {
        let b = &p.box3d;
        let rho = 0.5
            * ((b.size[0] / g as f64).powi(2)
                + (b.size[1] / g as f64).powi(2)
                + (b.size[2] / g as f64).powi(2))
            .sqrt();
        let (s, cy) = (b.yaw.sin(), b.yaw.cos());
        let mut cell_idx = 0usize;
        for gx in 0..g {
            for gy in 0..g {
                for gz in 0..g {
                    let local = [
                        ((gx as f64 + 0.5) / g as f64 - 0.5) * b.size[0],
                        ((gy as f64 + 0.5) / g as f64 - 0.5) * b.size[1],
                        ((gz as f64 + 0.5) / g as f64 - 0.5) * b.size[2],
                    ];
                    let world = [
                        b.center[0] + cy * local[0] - s * local[1],
                        b.center[1] + s * local[0] + cy * local[1],
                        b.center[2] + local[2],
                    ];
                    let mut expect = vec![f32::NEG_INFINITY; c];
                    let mut any = false;
                    for k in 0..n {
                        let d2: f64 = (0..3)
                            .map(|a| (feats.centroids[k][a] - world[a]).powi(2))
                            .sum();
                        if d2 <= rho * rho {
                            any = true;
                            for i in 0..c {
                                expect[i] = expect[i].max(feats.features.at(&[k, i]));
                            }
                        }
                    }
                    if !any {
                        expect = vec![0.0; c];
                    }
                    for i in 0..c {
                        let got = pooled.data()[(pi * g * g * g + cell_idx) * c + i];
                        assert!(
                            (got - expect[i]).abs() < 1e-6,
                            "prop {pi} cell {cell_idx} ch {i}"
                        );
                    }
                    cell_idx += 1;
                }
            }
        }
    }
}

#[test]
fn hsfp_single_level_equals_its_pooled_block_and_widths_add() {
    let cfg = DeformConfig { heads: 2, points: 2 };
    let c = 8;
    let c_img = 4;
    let cal = vod_calibration();
    let mut rng = SplitMix64::new(60);
    let pyr = rand_pyramid(&mut rng, &[4.0, 8.0], (96, 128), c_img);
    let mut decl = ParamDecl::new();
    for s in [4u32, 8] {
        declare_deform_params(&mut decl, &hsfp_prefix(s), c, c_img, &cfg, 2, 2 * c).unwrap();
    }
    let store = ParamStore::init(&decl, 15);
    let mk = |rng: &mut SplitMix64, scale: u32| SparseVoxelFeatures {
        features: rand_tensor(rng, &[6, c], 1.0),
        coords: (0..6).map(|i| [i, 0, 0]).collect(),
        centroids: (0..6)
            .map(|_| {
                [
                    rng.uniform(5.0, 25.0),
                    rng.uniform(-6.0, 6.0),
                    rng.uniform(-1.0, 1.0),
                ]
            })
            .collect(),
        counts: vec![1; 6],
        scale,
    };
    let x3 = mk(&mut rng, 4);
    let x4 = mk(&mut rng, 8);
    let proposals = vec![
        Proposal {
            box3d: Box3D::new([12.0, 0.0, 0.0], [6.0, 4.0, 2.0], 0.2),
            score: 1.0,
            class: 0,
        },
        Proposal {
            box3d: Box3D::new([18.0, -2.0, 0.0], [5.0, 3.0, 2.0], -0.4),
            score: 0.8,
            class: 0,
        },
    ];
    let g = 3;
    let single = hsfp(&[&x4], &pyr, &cal, &proposals, &store, &cfg, g).unwrap();
    let fused4 = qgslf_block(&x4, &pyr, &cal, &store, &hsfp_prefix(8), &cfg).unwrap();
    let pooled4 = roi_grid_pool(&fused4, &proposals, g);
    assert_eq!(single.data(), pooled4.data());

    let both = hsfp(&[&x4, &x3], &pyr, &cal, &proposals, &store, &cfg, g).unwrap();
    assert_eq!(both.dims(), &[2, 2 * g * g * g * c]);
    // ascending scale order: x3 block first
    let fused3 = qgslf_block(&x3, &pyr, &cal, &store, &hsfp_prefix(4), &cfg).unwrap();
    let pooled3 = roi_grid_pool(&fused3, &proposals, g);
    let w = g * g * g * c;
    for pi in 0..2 {
        assert_eq!(
            &both.data()[pi * 2 * w..pi * 2 * w + w],
            &pooled3.data()[pi * w..(pi + 1) * w]
        );
        assert_eq!(
            &both.data()[pi * 2 * w + w..(pi + 1) * 2 * w],
            &pooled4.data()[pi * w..(pi + 1) * w]
        );
    }
}

#[test]
fn hsfp_is_permutation_equivariant_in_proposals() {
    let cfg = DeformConfig { heads: 2, points: 2 };
    let c = 8;
    let cal = vod_calibration();
    let mut rng = SplitMix64::new(61);
    let pyr = rand_pyramid(&mut rng, &[4.0], (96, 128), 4);
    let mut decl = ParamDecl::new();
    declare_deform_params(&mut decl, &hsfp_prefix(8), c, 4, &cfg, 1, 2 * c).unwrap();
    let store = ParamStore::init(&decl, 19);
    let x4 = SparseVoxelFeatures {
        features: rand_tensor(&mut rng, &[5, c], 1.0),
        coords: (0..5).map(|i| [i, 1, 0]).collect(),
        centroids: (0..5)
            .map(|_| {
                [
                    rng.uniform(5.0, 25.0),
                    rng.uniform(-6.0, 6.0),
                    rng.uniform(-1.0, 1.0),
                ]
            })
            .collect(),
        counts: vec![1; 5],
        scale: 8,
    };
    let proposals: Vec<Proposal> = (0..3)
        .map(|i| Proposal {
            box3d: Box3D::new([8.0 + 4.0 * i as f64, 0.0, 0.0], [5.0, 3.0, 2.0], 0.1 * i as f64),
            score: 1.0,
            class: 0,
        })
        .collect();
    let base = hsfp(&[&x4], &pyr, &cal, &proposals, &store, &cfg, 2).unwrap();
    let permuted: Vec<Proposal> = vec![proposals[2].clone(), proposals[0].clone(), proposals[1].clone()];
    let perm = hsfp(&[&x4], &pyr, &cal, &permuted, &store, &cfg, 2).unwrap();
    let w = base.dims()[1];
    for (new_row, old_row) in [(0usize, 2usize), (1, 0), (2, 1)] {
        assert_eq!(
            &perm.data()[new_row * w..(new_row + 1) * w],
            &base.data()[old_row * w..(old_row + 1) * w]
        );
    }
}
