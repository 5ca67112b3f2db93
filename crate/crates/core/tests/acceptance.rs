//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured numbers (run with `--nocapture` to see
//! them on success).
//!
//! The spectral-efficiency criterion is cross-checked against a
//! straight-line oracle at the bottom of this file that re-derives the
//! whole pipeline (free-space channel, DFT precoding, SIR, capped sum)
//! from scratch on hand-rolled complex arithmetic, sharing no code with
//! the library.

use std::sync::Arc;

use losmimo::antenna::AntennaPattern;
use losmimo::channel::{fs_channel, ray_channel, synth_rays, PointScatterer};
use losmimo::geometry::{compute_num_streams, compute_spacing, CarrierConfig, LinkGeometry};
use losmimo::metrics::{complexity_ratios, sir, stream_metrics, SeBounds};
use losmimo::scenario::{
    builtin_catalog, link_preset, run_scenario, run_suite, Environment, Scenario,
};
use losmimo::schemes::{
    bdft_sm_mrt, build_block_mapping, butler, butler_inverse, dft_sm_mrt, svd_scheme, SchemeConfig,
    SchemeKind,
};
use losmimo::Complex64;

fn pass(criterion: u32, detail: &str) {
    println!("criterion {criterion} PASS: {detail}");
}

fn carrier() -> CarrierConfig {
    CarrierConfig::new(26e9).unwrap()
}

fn isotropic() -> Arc<AntennaPattern> {
    Arc::new(AntennaPattern::Isotropic)
}

/// Deterministic random complex channel for property trials.
fn random_channel(n: usize, seed: u64) -> losmimo::ChannelMatrix {
    let mut state = seed;
    let mut next = move || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z = z ^ (z >> 31);
        (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let entries = nalgebra::DMatrix::from_fn(n, n, |_, _| Complex64::new(next(), next()));
    losmimo::ChannelMatrix::new(entries, carrier(), losmimo::Provenance::Synthetic).unwrap()
}

#[test]
fn criterion_1_complexity_ratios_match_published_table() {
    let start = std::time::Instant::now();
    let cases: &[(SchemeConfig, Option<i64>, i64)] = &[
        (SchemeConfig::dft(64, 1.0).unwrap(), Some(60), 693),
        (SchemeConfig::block(64, 2, 0, 1.0).unwrap(), Some(61), 832),
        (SchemeConfig::block(64, 4, 0, 1.0).unwrap(), Some(62), 1040),
        (
            SchemeConfig::block(256, 8, 0, 1.0).unwrap(),
            Some(253),
            13158,
        ),
        (
            SchemeConfig::block(256, 8, 1, 1.0).unwrap(),
            Some(238),
            13158,
        ),
        // Receiver-side checks only; the published transmitter cells for
        // these rows are internally inconsistent and excluded.
        (SchemeConfig::dft(128, 1.0).unwrap(), None, 2359),
        (SchemeConfig::block(128, 16, 0, 1.0).unwrap(), None, 5504),
        (SchemeConfig::dft(256, 1.0).unwrap(), None, 8224),
    ];
    for (cfg, want_tx, want_rx) in cases {
        let mu = complexity_ratios(cfg);
        if let Some(tx) = want_tx {
            assert_eq!(
                mu.tx_rounded(),
                *tx,
                "mu_tx for N_U={} N_S={} N_CP={}",
                cfg.num_streams(),
                cfg.num_blocks(),
                cfg.cp_len()
            );
        }
        assert_eq!(
            mu.rx_rounded(),
            *want_rx,
            "mu_rx for N_U={} N_S={} N_CP={}",
            cfg.num_streams(),
            cfg.num_blocks(),
            cfg.cp_len()
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    pass(
        1,
        &format!("8 complexity-ratio rows exact after rounding ({elapsed:?})"),
    );
}

#[test]
fn criterion_2_deployment_parameters_match_published_table() {
    let start = std::time::Instant::now();
    let lambda = carrier().wavelength();
    let step = 1e-4;

    // (mounting length, estimated distance, streams, printed d in mm,
    // print resolution in mm). A None length means the stream count was
    // fixed rather than derived.
    let rows: &[(Option<f64>, f64, usize, f64, f64)] = &[
        (None, 25.0, 64, 67.1, 0.1),
        (Some(0.30), 0.5, 8, 26.8, 0.1),
        (Some(1.85), 17.4, 16, 112.0, 1.0),
        (Some(1.3), 0.9, 128, 9.0, 1.0),
    ];
    for &(length, d_hat, streams, printed_mm, res_mm) in rows {
        if let Some(length) = length {
            assert_eq!(
                compute_num_streams(length, lambda, d_hat).unwrap(),
                streams,
                "stream count for L={length}, D={d_hat}"
            );
        }
        let d = compute_spacing(lambda, d_hat, streams, step).unwrap();
        // The printed value carries its own rounding; allow half of the
        // printed resolution plus one quantization step.
        let tol = res_mm * 1e-3 / 2.0 + step / streams as f64;
        assert!(
            (d - printed_mm * 1e-3).abs() <= tol,
            "spacing for D={d_hat}: got {d}, printed {printed_mm} mm, tol {tol}"
        );
    }

    // The published link-5 row contradicts both formulas; lock the
    // mismatch in rather than repairing it.
    let five = link_preset(5).unwrap();
    assert!(!five.formula_consistent);
    let derived_streams = compute_num_streams(3.7, lambda, 8.9).unwrap();
    assert_ne!(
        derived_streams, five.num_streams,
        "link 5 stream count should mismatch"
    );
    assert_eq!(derived_streams, 128);
    for streams in [64usize, 128] {
        let d = compute_spacing(lambda, 8.9, streams, step).unwrap();
        assert!(
            (d - 45.8e-3).abs() > 1e-3,
            "link-5 spacing unexpectedly matches the formula at N_U={streams}"
        );
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    pass(
        2,
        &format!(
            "links 0-4 and 6 reproduce printed (N_U, d); link 5 locked as mismatch ({elapsed:?})"
        ),
    );
}

#[test]
fn criterion_3_svd_hits_stream_cap_on_every_preset() {
    let start = std::time::Instant::now();

    // Direct SVD runs on each distinct link preset.
    for link in [0u32, 3, 4, 5, 6, 7] {
        let streams = link_preset(link).unwrap().num_streams;
        let sc = Scenario::from_preset(format!("svd-{link}"), link, SchemeKind::Svd, 1, 0).unwrap();
        let r = run_scenario(&sc).unwrap();
        assert_eq!(
            r.total_se,
            (streams * 8) as f64,
            "SVD spectral efficiency on link {link}"
        );
    }

    // Every catalog row's SVD reference must equal the cap as well: the
    // published ratio is recoverable exactly from the emitted fields.
    let report = run_suite(&builtin_catalog("table2-fs").unwrap());
    assert!(report.failures.is_empty());
    assert_eq!(report.results.len(), 18);
    for r in &report.results {
        let cap = (r.n_u * 8) as f64;
        let implied = 100.0 * r.total_se / cap;
        assert_eq!(
            r.phi_svd_pct, implied,
            "scenario {}: SVD reference was not exactly N_U * 8",
            r.name
        );
        assert_eq!(
            r.phi_fs_pct, 100.0,
            "scenario {}: free-space run must be its own reference",
            r.name
        );
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    pass(
        3,
        &format!("SVD reaches N_U*8 exactly on all presets, suite in {elapsed:?}"),
    );
}

#[test]
fn criterion_4_link3_spectral_efficiency_matches_oracle_and_table() {
    let start = std::time::Instant::now();

    // Library path.
    let dft =
        run_scenario(&Scenario::from_preset("3", 3, SchemeKind::DftSmMrt, 1, 0).unwrap()).unwrap();
    let bdft =
        run_scenario(&Scenario::from_preset("3*", 3, SchemeKind::BlockDftSmMrt, 2, 0).unwrap())
            .unwrap();

    // Independent straight-line oracle on the same printed parameters.
    let oracle_dft = oracle::link3_dft_se();
    let oracle_bdft = oracle::link3_bdft_se(2);

    assert!(
        (dft.total_se - oracle_dft).abs() <= 1e-9 * oracle_dft,
        "library {} vs oracle {oracle_dft}",
        dft.total_se
    );
    assert!(
        (bdft.total_se - oracle_bdft).abs() <= 1e-9 * oracle_bdft,
        "library {} vs oracle {oracle_bdft}",
        bdft.total_se
    );

    // Published free-space values: 47 and 52, +/- 20 %.
    assert!(
        dft.total_se >= 47.0 * 0.8 && dft.total_se <= 47.0 * 1.2,
        "{}",
        dft.total_se
    );
    assert!(
        bdft.total_se >= 52.0 * 0.8 && bdft.total_se <= 52.0 * 1.2,
        "{}",
        bdft.total_se
    );
    assert_eq!(dft.phi_fs_pct, 100.0);
    assert_eq!(bdft.phi_fs_pct, 100.0);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    pass(
        4,
        &format!(
            "link-3 free space: DFT {:.2} (oracle {:.2}), block {:.2} (oracle {:.2}) ({elapsed:?})",
            dft.total_se, oracle_dft, bdft.total_se, oracle_bdft
        ),
    );
}

#[test]
fn criterion_5_property_suite() {
    let start = std::time::Instant::now();

    // Butler unitarity across 100 sizes.
    for n in 1..=100usize {
        let gap =
            (butler(n) * butler_inverse(n) - nalgebra::DMatrix::<Complex64>::identity(n, n)).norm();
        assert!(gap <= 1e-12, "butler unitarity at n={n}: {gap:e}");
    }

    // R * T = I over every block partition of N_U in {4, 8, 16, 32}.
    let mut combos = 0usize;
    for streams in [4usize, 8, 16, 32] {
        let mut blocks = 1;
        while blocks <= streams {
            let block_size = streams / blocks;
            for cp in 0..=block_size {
                let cfg = SchemeConfig::block(streams, blocks, cp, 1.0).unwrap();
                let m = build_block_mapping(&cfg).unwrap();
                let gap = (&m.receive * &m.transmit
                    - nalgebra::DMatrix::<Complex64>::identity(streams, streams))
                .norm();
                assert!(
                    gap <= 1e-12,
                    "R*T at N_U={streams} N_S={blocks} N_CP={cp}: {gap:e}"
                );
                combos += 1;
            }
            blocks *= 2;
        }
    }
    assert!(combos >= 100, "only {combos} block combinations exercised");

    // Single-block, no-prefix block scheme reduces to the plain scheme.
    for trial in 0..100u64 {
        let n = [4usize, 8, 16, 32, 64][(trial % 5) as usize];
        let h = random_channel(n, 0x5eed + trial);
        let plain = dft_sm_mrt(&h, 1.0).unwrap();
        let block = bdft_sm_mrt(&h, &SchemeConfig::block(n, 1, 0, 1.0).unwrap()).unwrap();
        let gap = (&plain.matrix - &block.matrix).norm() / plain.matrix.norm();
        assert!(
            gap <= 1e-12,
            "reduction gap {gap:e} at n={n}, trial {trial}"
        );
    }

    // SIR is invariant to the power budget.
    for trial in 0..100u64 {
        let n = [4usize, 8, 16][(trial % 3) as usize];
        let h = random_channel(n, 0xca11 + trial);
        let scale = 0.01 + (trial as f64) * 0.37;
        let base = sir(&dft_sm_mrt(&h, 1.0).unwrap());
        let scaled = sir(&dft_sm_mrt(&h, scale).unwrap());
        for (a, b) in base.iter().zip(&scaled) {
            assert!(
                (a - b).abs() <= 1e-9 * a.abs().max(1e-300),
                "sir moved under rescale"
            );
        }
    }

    // The plain scheme's equivalent channel is Hermitian positive
    // semidefinite.
    for trial in 0..100u64 {
        let n = [4usize, 8, 16][(trial % 3) as usize];
        let h = random_channel(n, 0x9d0f + trial);
        let eq = dft_sm_mrt(&h, 1.0).unwrap();
        let herm = (&eq.matrix - eq.matrix.adjoint()).norm();
        assert!(herm <= 1e-10 * eq.matrix.norm(), "Hermitian gap {herm:e}");
        for i in 0..n {
            assert!(eq.matrix[(i, i)].re >= -1e-12, "negative diagonal at {i}");
        }
    }

    // Synthetic propagation with no scatterers is free space.
    for trial in 0..100u64 {
        let n = 2 + (trial % 7) as usize;
        let spacing = 0.01 + (trial as f64) * 0.003;
        let distance = 0.4 + (trial as f64) * 0.11;
        let g = LinkGeometry::broadside(n, n, spacing, distance, isotropic(), isotropic()).unwrap();
        let c = carrier();
        let fs = fs_channel(&g, &c).unwrap();
        let rays = synth_rays(&g, &[], &c).unwrap();
        let syn = ray_channel(
            &rays,
            &g.tx.pattern,
            &g.rx.pattern,
            &g.tx.boresight,
            &g.rx.boresight,
            &c,
        )
        .unwrap();
        for (a, b) in syn.entries.iter().zip(fs.entries.iter()) {
            assert!((a - b).norm() <= 1e-12 * b.norm(), "trial {trial}");
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    pass(
        5,
        &format!("unitarity, R*T, reduction, SIR invariance, PSD, synthetic=FS ({elapsed:?})"),
    );
}

#[test]
fn criterion_6_eigenvalue_flatness_under_design_conditions() {
    let start = std::time::Instant::now();
    let c = carrier();
    let lambda = c.wavelength();

    // Singular-value spread of the free-space channel with the exact
    // design spacing d = sqrt(lambda * D / N).
    let spread = |n: usize, ratio: f64| -> f64 {
        let distance = ratio * ratio * lambda * n as f64;
        let spacing = (lambda * distance / n as f64).sqrt();
        let g = LinkGeometry::broadside(n, n, spacing, distance, isotropic(), isotropic()).unwrap();
        let h = fs_channel(&g, &c).unwrap();
        let sv = h.entries.clone().svd(false, false).singular_values;
        let max = sv.iter().cloned().fold(f64::MIN, f64::max);
        let min = sv.iter().cloned().fold(f64::MAX, f64::min);
        max / min
    };

    for n in [8usize, 16, 32] {
        for ratio in [6.0f64, 8.0, 10.0, 14.0, 20.0] {
            let s = spread(n, ratio);
            assert!(s <= 1.5, "spread {s:.4} at N={n}, D/(dN)={ratio}");
        }
    }

    let mut previous = f64::INFINITY;
    for ratio in [2.0f64, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0] {
        let s = spread(16, ratio);
        assert!(
            s < previous,
            "spread not decreasing at D/(dN)={ratio}: {s:.6} vs {previous:.6}"
        );
        previous = s;
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    pass(
        6,
        &format!("spread <= 1.5 beyond ratio 6 and monotone from 2 to 20 ({elapsed:?})"),
    );
}

#[test]
fn criterion_7_dominant_scatterer_degrades_dft_but_not_svd() {
    let start = std::time::Instant::now();

    // One strong single-bounce scatterer halfway along the link-7 hop,
    // two meters off axis.
    let hop = link_preset(7).unwrap().estimated_distance;
    let scatterer = PointScatterer::new(
        nalgebra::Point3::new(hop / 2.0, 2.0, 0.0),
        Complex64::new(1.0, 0.0),
    );

    let fs =
        run_scenario(&Scenario::from_preset("7", 7, SchemeKind::DftSmMrt, 1, 0).unwrap()).unwrap();
    let disturbed = run_scenario(
        &Scenario::from_preset("7-scattered", 7, SchemeKind::DftSmMrt, 1, 0)
            .unwrap()
            .with_environment(Environment::Synthetic(vec![scatterer])),
    )
    .unwrap();
    assert!(
        disturbed.total_se <= 0.9 * fs.total_se,
        "DFT SE only moved from {} to {}",
        fs.total_se,
        disturbed.total_se
    );

    let svd = run_scenario(
        &Scenario::from_preset("7-scattered-svd", 7, SchemeKind::Svd, 1, 0)
            .unwrap()
            .with_environment(Environment::Synthetic(vec![scatterer])),
    )
    .unwrap();
    assert_eq!(svd.total_se, 2048.0, "SVD must stay at the stream cap");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    pass(
        7,
        &format!(
            "scatterer drops DFT from {:.0} to {:.0} bits/s/Hz while SVD holds 2048 ({elapsed:?})",
            fs.total_se, disturbed.total_se
        ),
    );
}

#[test]
fn scheme_pipeline_agrees_with_oracle_on_svd_reference() {
    // Cheap extra cross-check: the library's SVD run on the oracle's own
    // matrix dimensions yields the analytic cap the oracle predicts.
    let sc = Scenario::from_preset("svd-3", 3, SchemeKind::Svd, 1, 0).unwrap();
    let r = run_scenario(&sc).unwrap();
    assert_eq!(r.total_se, 64.0);
    let eq = svd_scheme(
        &fs_channel(
            &LinkGeometry::broadside(8, 8, 0.0268, 0.5, isotropic(), isotropic()).unwrap(),
            &carrier(),
        )
        .unwrap(),
        1.0,
    )
    .unwrap()
    .0;
    let m = stream_metrics(&eq, &SeBounds::default());
    assert_eq!(m.total, 64.0);
}

/// Straight-line re-derivation of the free-space DFT pipeline on plain
/// `(f64, f64)` complex pairs. Shares nothing with the library: its own
/// matrix product, DFT matrix, channel synthesis, SIR, and capping.
#[allow(clippy::needless_range_loop)]
mod oracle {
    type Cx = (f64, f64);

    const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    const PI: f64 = std::f64::consts::PI;

    // Printed link-3 deployment: 8 streams, 26.8 mm spacing, 0.5 m hop.
    const STREAMS: usize = 8;
    const SPACING: f64 = 0.0268;
    const HOP: f64 = 0.5;

    fn cadd(a: Cx, b: Cx) -> Cx {
        (a.0 + b.0, a.1 + b.1)
    }

    fn cmul(a: Cx, b: Cx) -> Cx {
        (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
    }

    fn cconj(a: Cx) -> Cx {
        (a.0, -a.1)
    }

    fn cabs2(a: Cx) -> f64 {
        a.0 * a.0 + a.1 * a.1
    }

    fn matmul(a: &[Vec<Cx>], b: &[Vec<Cx>]) -> Vec<Vec<Cx>> {
        let (m, k, n) = (a.len(), b.len(), b[0].len());
        assert_eq!(a[0].len(), k);
        let mut c = vec![vec![(0.0, 0.0); n]; m];
        for i in 0..m {
            for p in 0..k {
                for j in 0..n {
                    c[i][j] = cadd(c[i][j], cmul(a[i][p], b[p][j]));
                }
            }
        }
        c
    }

    fn adjoint(a: &[Vec<Cx>]) -> Vec<Vec<Cx>> {
        let (m, n) = (a.len(), a[0].len());
        let mut out = vec![vec![(0.0, 0.0); m]; n];
        for i in 0..m {
            for j in 0..n {
                out[j][i] = cconj(a[i][j]);
            }
        }
        out
    }

    fn dft(n: usize) -> Vec<Vec<Cx>> {
        let s = 1.0 / (n as f64).sqrt();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|l| {
                        let theta = -2.0 * PI * (k * l) as f64 / n as f64;
                        (s * theta.cos(), s * theta.sin())
                    })
                    .collect()
            })
            .collect()
    }

    fn idft(n: usize) -> Vec<Vec<Cx>> {
        adjoint(&dft(n))
    }

    /// Free-space channel of two parallel broadside arrays along z.
    fn channel() -> Vec<Vec<Cx>> {
        let lambda = SPEED_OF_LIGHT / 26e9;
        let pos = |k: usize| (k as f64 - (STREAMS as f64 - 1.0) / 2.0) * SPACING;
        let mut h = vec![vec![(0.0, 0.0); STREAMS]; STREAMS];
        for rx in 0..STREAMS {
            for tx in 0..STREAMS {
                let dz = pos(rx) - pos(tx);
                let dist = (HOP * HOP + dz * dz).sqrt();
                let magnitude = lambda / (4.0 * PI * dist);
                let phase = -2.0 * PI * dist / lambda;
                h[rx][tx] = (magnitude * phase.cos(), magnitude * phase.sin());
            }
        }
        h
    }

    fn block_diagonal(block: &[Vec<Cx>], count: usize) -> Vec<Vec<Cx>> {
        let (bm, bn) = (block.len(), block[0].len());
        let mut out = vec![vec![(0.0, 0.0); bn * count]; bm * count];
        for s in 0..count {
            for i in 0..bm {
                for j in 0..bn {
                    out[s * bm + i][s * bn + j] = block[i][j];
                }
            }
        }
        out
    }

    /// Capped total spectral efficiency from an equivalent channel.
    fn total_se(g: &[Vec<Cx>]) -> f64 {
        (0..g.len())
            .map(|n| {
                let wanted = cabs2(g[n][n]);
                let leakage: f64 = (0..g.len())
                    .filter(|&p| p != n)
                    .map(|p| cabs2(g[n][p]))
                    .sum();
                let sir = if leakage == 0.0 {
                    if wanted == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    wanted / leakage
                };
                let c = (1.0 + sir).log2().min(8.0);
                if c > 1.0 {
                    c
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Total spectral efficiency of full-array DFT multiplexing with
    /// matched-channel precoding on the link-3 free-space channel.
    pub fn link3_dft_se() -> f64 {
        let h = channel();
        let g = matmul(
            &matmul(&dft(STREAMS), &h),
            &matmul(&adjoint(&h), &idft(STREAMS)),
        );
        total_se(&g)
    }

    /// Same with the DFT applied per block of `STREAMS / blocks` streams.
    pub fn link3_bdft_se(blocks: usize) -> f64 {
        let h = channel();
        let size = STREAMS / blocks;
        let receive = block_diagonal(&dft(size), blocks);
        let transmit = block_diagonal(&idft(size), blocks);
        let g = matmul(&matmul(&receive, &h), &matmul(&adjoint(&h), &transmit));
        total_se(&g)
    }
}
