use fieldsaddle::finder::{newton_refine, search, NewtonStatus};
use fieldsaddle::model::gradient;
use fieldsaddle::symmetry::equivalent;
use fieldsaddle::{ring, ModelParams, SearchParams};

fn params(starts: usize, seed: u64) -> SearchParams {
    SearchParams {
        n_starts: starts,
        rng_seed: seed,
        ..SearchParams::default()
    }
}

#[test]
fn three_electrons_have_ring_and_planar_saddles() {
    let out = search(&ModelParams::neutral(3), &params(5000, 1), 1).unwrap();
    let energies: Vec<f64> = out.records.iter().map(|r| r.energy).collect();
    assert_eq!(energies.len(), 2, "{energies:?}");
    assert!((energies[0] + 7.6673).abs() < 1e-4);
    assert!((energies[1] + 7.3902).abs() < 1e-4);
    assert_eq!(out.records[1].n_u, 3);
    assert!((out.records[1].lambda_r - 1.0981).abs() < 1e-3);
}

#[test]
fn records_are_stationary_downfield_and_fixed_points() {
    let m = ModelParams::neutral(5);
    let p = params(20_000, 7);
    let out = search(&m, &p, 1).unwrap();
    assert!(!out.records.is_empty());
    for (k, r) in out.records.iter().enumerate() {
        assert_eq!(r.nu, k + 1);
        assert!(gradient(&r.positions, &m).unwrap().norm() < p.newton_tol);
        assert!(r.positions.is_downfield());
        let again = newton_refine(&r.positions, &m, &p);
        assert_eq!(again.status, NewtonStatus::Converged);
        for (a, b) in again.config.positions.iter().flatten().zip(r.positions.positions.iter().flatten()) {
            assert!((a - b).abs() <= 1e-8);
        }
    }
    assert!(out.records.windows(2).all(|w| w[0].energy <= w[1].energy));
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let m = ModelParams::neutral(4);
    let p = params(3000, 99);
    let a = search(&m, &p, 1).unwrap();
    let b = search(&m, &p, 3).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.counts, b.counts);
}

#[test]
fn smaller_budget_finds_a_subset() {
    let m = ModelParams::neutral(5);
    let small = search(&m, &params(2000, 5), 1).unwrap();
    let large = search(&m, &params(20_000, 5), 1).unwrap();
    for r in &small.records {
        assert!(
            large.records.iter().any(|q| equivalent(&q.positions, &r.positions, 1e-5)),
            "nu={} missing from the larger run",
            r.nu
        );
        let twin = large.records.iter().find(|q| equivalent(&q.positions, &r.positions, 1e-5)).unwrap();
        assert!(twin.hits >= r.hits);
    }
}

#[test]
fn analytic_families_are_rediscovered() {
    for n in 2..=5 {
        let m = ModelParams::neutral(n);
        let out = search(&m, &params(20_000, 11), 1).unwrap();
        let ring = ring::ring_saddle(n).unwrap().unwrap().configuration();
        assert!(out.records.iter().any(|r| equivalent(&r.positions, &ring, 1e-5)), "ring n={n}");
        if n >= 3 {
            let c = ring::ring_plus_center_saddle(n).unwrap().configuration();
            assert!(out.records.iter().any(|r| equivalent(&r.positions, &c, 1e-5)), "center n={n}");
        }
    }
}

#[test]
fn upfield_points_can_be_kept() {
    let m = ModelParams::neutral(3);
    let mut p = params(2000, 3);
    p.downfield_only = false;
    let out = search(&m, &p, 1).unwrap();
    assert_eq!(out.counts.upfield, 0);
    assert!(out.records.len() >= 2);
}
