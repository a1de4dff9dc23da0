use qesa_core::analysis::*;
use qesa_core::annealer::*;
use qesa_core::graph::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    fn rank(v: &[f64]) -> Vec<f64> {
        let mut order: Vec<usize> = (0..v.len()).collect();
        order.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < order.len() {
            let mut j = i;
            while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[order[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (rank(xs), rank(ys));
    let mx = rx.iter().sum::<f64>() / rx.len() as f64;
    let my = ry.iter().sum::<f64>() / ry.len() as f64;
    let num: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let dx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum::<f64>().sqrt();
    let dy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum::<f64>().sqrt();
    num / (dx * dy)
}

fn degeneracy(graph: &Graph) -> (u32, u64, u64) {
    let n = graph.n();
    assert!(n <= 24);
    let adj: Vec<u32> = (0..n)
        .map(|v| graph.neighbors(v).iter().fold(0u32, |m, &u| m | 1 << u))
        .collect();
    let (mut best, mut d_best, mut d_minus) = (0u32, 0u64, 0u64);
    for mask in 0u32..(1 << n) {
        let mut ok = true;
        let mut m = mask;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            if adj[v] & mask != 0 {
                ok = false;
                break;
            }
            m &= m - 1;
        }
        if !ok {
            continue;
        }
        let c = mask.count_ones();
        if c > best {
            d_minus = d_best;
            best = c;
            d_best = 1;
        } else if c == best {
            d_best += 1;
        } else if c + 1 == best {
            d_minus += 1;
        }
    }
    (best, d_best, d_minus)
}

fn run_and_capture(
    graph: &Graph,
    init: &SpinConfiguration,
    schedule: &CoolingSchedule,
    params: &EnergyParams,
    mis: &MisCertificate,
    capture_at: &[f64],
    seed: u64,
) -> Vec<Option<SpinConfiguration>> {
    let n = graph.n();
    let mut config = init.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut captured: Vec<Option<SpinConfiguration>> = vec![None; capture_at.len()];
    fn note(
        graph: &Graph,
        mis: &MisCertificate,
        capture_at: &[f64],
        config: &SpinConfiguration,
        captured: &mut [Option<SpinConfiguration>],
    ) {
        let alpha = approximation_ratio(graph, config, mis.size).unwrap();
        for (slot, &threshold) in captured.iter_mut().zip(capture_at) {
            if slot.is_none() && alpha >= threshold {
                *slot = Some(config.clone());
            }
        }
    }
    note(graph, mis, capture_at, &config, &mut captured);
    for epoch in 0..schedule.epochs_max {
        let t = schedule.temperature(epoch);
        for _ in 0..n {
            let v = rng.random_range(0..n);
            if let Some(p) = propose_update(graph, &config, v, &mut rng) {
                let before = mis_energy(graph, &config, params).unwrap();
                let mut cand = config.clone();
                match p {
                    Proposal::Add { vertex } => cand.set(vertex, true),
                    Proposal::Remove { vertex } => cand.set(vertex, false),
                    Proposal::Swap { vertex, neighbor } => {
                        let (a, b) = (cand.bit(vertex), cand.bit(neighbor));
                        cand.set(vertex, b);
                        cand.set(neighbor, a);
                    }
                }
                let after = mis_energy(graph, &cand, params).unwrap();
                if metropolis_accept(after - before, t, &mut rng).unwrap() {
                    config = cand;
                }
            }
        }
        note(graph, mis, capture_at, &config, &mut captured);
        if captured.iter().all(|c| c.is_some()) {
            break;
        }
    }
    captured
}

#[test]
#[ignore]
fn ratio_trend_trajectory_sampled() {
    let mut found = Vec::new();
    'outer: for (r, c) in [(5, 5), (4, 6), (6, 4), (5, 4), (4, 5)] {
        for fpct in [64u32, 68, 70, 72, 76, 80] {
            for s in 0..120u64 {
                let f = fpct as f64 / 100.0;
                let Ok(g) = generate_kings_graph(r, c, f, 6.0, s) else { continue };
                if g.n() < 14 || g.n() > 18 || g.edge_count() == 0 {
                    continue;
                }
                let (mis, d0, d1) = degeneracy(&g);
                if d0 == 1 && mis >= 6 && d1 >= 12 {
                    found.push(g);
                    if found.len() >= 10 {
                        break 'outer;
                    }
                }
            }
        }
    }
    eprintln!("screened {} unique-MIS instances", found.len());

    let schedule = CoolingSchedule::geometric(0.2, 0.03, 300).unwrap();
    let params = EnergyParams::default();
    let alpha_initials = [0.65, 0.8];
    let alpha_final = 0.9;
    let mut all_points = Vec::new();
    for (gi, graph) in found.iter().enumerate() {
        let mis = exact_mis(graph).unwrap();
        let n = graph.n();
        let mut warm = Vec::new();
        let mut cold = Vec::new();
        let occupation = (0.3 * n as f64).round() as usize;
        for i in 0..40u64 {
            let seed = gi as u64 * 1_000_000 + i;
            let scout_init =
                random_init_matched_occupation(n, occupation, seed ^ 0xC0FFEE).unwrap();
            let captured = run_and_capture(
                graph, &scout_init, &schedule, &params, &mis, &alpha_initials, seed ^ 0xBEEF,
            );
            for config in captured.into_iter().flatten() {
                if approximation_ratio(graph, &config, mis.size).unwrap() >= alpha_final {
                    continue;
                }
                warm.push(
                    anneal(graph, &config, &schedule, &params, Some(alpha_final), &mis,
                        seed.wrapping_mul(31).wrapping_add(17),
                        RunLabel { graph_id: format!("g{gi}"), init_kind: InitKind::Explicit })
                    .unwrap(),
                );
            }
            let cold_init = random_init_matched_occupation(n, occupation, seed ^ 0x51DE).unwrap();
            cold.push(
                anneal(graph, &cold_init, &schedule, &params, Some(alpha_final), &mis, seed + 7,
                    RunLabel { graph_id: format!("g{gi}"), init_kind: InitKind::RandomMatched })
                .unwrap(),
            );
        }
        let pts = build_ratio_points(&cold, &warm, &alpha_initials, alpha_final);
        let gx: Vec<f64> = pts.iter().map(|p| p.hd_over_n).collect();
        let gy: Vec<f64> = pts.iter().map(|p| p.epoch_ratio).collect();
        eprintln!(
            "  graph {gi} (n={n}): warm {} cold {} pts {} spearman {:.3}",
            warm.len(),
            cold.len(),
            pts.len(),
            if gx.len() > 2 { spearman(&gx, &gy) } else { f64::NAN }
        );
        all_points.extend(pts);
    }
    let xs: Vec<f64> = all_points.iter().map(|p| p.hd_over_n).collect();
    let ys: Vec<f64> = all_points.iter().map(|p| p.epoch_ratio).collect();
    eprintln!(
        "POOLED trajectory-sampled points: {} spearman {:.4}",
        all_points.len(),
        spearman(&xs, &ys)
    );
}
