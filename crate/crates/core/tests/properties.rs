use nalgebra::{Matrix2, Vector2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pitnav::gridworld::{manhattan, Action, AgentState, Cell, CollisionKind, GridMap};
use pitnav::harness::{ExperimentConfig, Variant};
use pitnav::learners::{argmax, q_update, softmax_probs, v_update, QTable, Schedule, VTable};
use pitnav::localization::{agent_fim, peb, total_fim, FisherInfo};
use pitnav::planner::{
    hybrid_q, plan, reliability_score, spe, ArbitrationParams, ModelEntry, ReliabilityState,
    System, TransitionModel,
};
use pitnav::radio::{
    gps_covariance, ranging_variance, received_power_dbm, rssi_reward, GpsModel, RadioConfig,
};
use pitnav::rewards::{motivation, MotivationParams};

fn action() -> impl Strategy<Value = Action> {
    (0..Action::COUNT).prop_map(|i| Action::ALL[i])
}

fn cell() -> impl Strategy<Value = Cell> {
    (0..36i32, 0..24i32).prop_map(|(x, y)| Cell::new(x, y))
}

fn scores() -> impl Strategy<Value = [f64; 5]> {
    prop::array::uniform5(-500.0..500.0f64)
}

proptest! {
    #[test]
    fn softmax_is_a_distribution(w in scores(), kappa in 1e-3..50.0f64) {
        let p = softmax_probs(&w, kappa);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn manhattan_is_a_metric(a in cell(), b in cell(), c in cell()) {
        prop_assert_eq!(manhattan(a, b), manhattan(b, a));
        prop_assert_eq!(manhattan(a, a), 0);
        prop_assert!(manhattan(a, c) <= manhattan(a, b) + manhattan(b, c));
        prop_assert!(manhattan(a, b) <= GridMap::bundled().d_max());
    }

    #[test]
    fn spe_in_unit_interval(pred in cell(), actual in cell(), a in action(), seen in any::<bool>()) {
        let map = GridMap::bundled();
        let mut m = TransitionModel::new(map.n_cells());
        if seen {
            m.record_transition(0, a, ModelEntry {
                next_state: map.index(pred),
                next_cell: pred,
                reward: 0.0,
                last_seen: 0,
                terminal: false,
            });
        }
        let e = spe(&m, 0, a, actual, map.d_max());
        prop_assert!((0.0..=1.0).contains(&e));
    }

    #[test]
    fn hybrid_is_convex(mf in scores(), mb in scores(), p in 0.0..=1.0f64) {
        let h = hybrid_q(&mf, &mb, p);
        for i in 0..5 {
            let (lo, hi) = (mf[i].min(mb[i]), mf[i].max(mb[i]));
            prop_assert!(h[i] >= lo - 1e-9 && h[i] <= hi + 1e-9);
        }
    }

    #[test]
    fn dirichlet_counts_conserved(obs in prop::collection::vec((0.0..1.0f64, -3.0..3.0f64), 0..300)) {
        let params = ArbitrationParams::default();
        let mut rel = ReliabilityState::new(params);
        for &(s, r) in &obs {
            rel.observe(s, r);
            prop_assert!((0.0..=1.0).contains(&rel.p_mb));
        }
        let expected = 3.0 * params.prior + obs.len() as f64;
        prop_assert_eq!(rel.counts(System::ModelBased).iter().sum::<f64>(), expected);
        prop_assert_eq!(rel.counts(System::ModelFree).iter().sum::<f64>(), expected);
    }

    #[test]
    fn zero_planning_steps_leave_q_untouched(vals in prop::collection::vec(-10.0..10.0f64, 20), seed in any::<u64>()) {
        let mut q = QTable::new(4);
        for (i, v) in vals.iter().enumerate() {
            q.set(i / 5, Action::ALL[i % 5], *v);
        }
        let mut m = TransitionModel::new(4);
        m.record_transition(1, Action::Up, ModelEntry {
            next_state: 2,
            next_cell: Cell::new(2, 0),
            reward: 1.0,
            last_seen: 0,
            terminal: false,
        });
        let before = q.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert_eq!(plan(&m, &mut q, 0, 0.5, 0.9, &mut rng), 0);
        prop_assert_eq!(q.values(), before.values());
    }

    #[test]
    fn peb_is_non_negative(pts in prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64, 1e-6..100.0f64), 1..6)) {
        let target = Vector2::new(0.5, 0.25);
        let fims = pts.iter().filter_map(|&(x, y, var)| {
            agent_fim(target, Vector2::new(x, y), var, &Matrix2::zeros()).ok()
        });
        let p = peb(&total_fim(fims), 1e-12).peb;
        prop_assert!(p >= 0.0);
    }

    #[test]
    fn motivation_is_bounded(b in -100.0..1000.0f64, t in -100.0..1000.0f64) {
        let m = motivation(&MotivationParams::for_budget(800), b, t);
        prop_assert!((0.0..=0.8).contains(&m));
    }

    #[test]
    fn config_round_trips(
        seed in any::<u64>(),
        n_episodes in 1..5000usize,
        n_steps in 1..2000usize,
        k in 0..10usize,
        v in 0..4usize,
        motivated in any::<bool>(),
        peb_star in 0.01..5.0f64,
    ) {
        let mut cfg = ExperimentConfig {
            seed,
            n_episodes,
            planning_steps: k,
            variant: Variant::ALL[v],
            motivation_enabled: motivated,
            peb_star,
            ..ExperimentConfig::default()
        };
        cfg.set_n_steps(n_steps);
        let back = ExperimentConfig::parse(&cfg.to_text()).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn step_agent_stays_on_free_ground(
        start in cell(),
        moves in prop::collection::vec(action(), 1..60),
    ) {
        let map = GridMap::bundled();
        prop_assume!(!map.is_wall(start));
        let mut st = AgentState::new(start, 800.0);
        for a in moves {
            let out = map.step_agent(&[], &st, a, 1.0);
            prop_assert!(map.in_bounds(out.next_pos) && !map.is_wall(out.next_pos));
            prop_assert_eq!(out.collided, out.collision_kind != CollisionKind::None);
            st.pos = out.next_pos;
        }
    }

    #[test]
    fn sequential_moves_never_overlap(moves in prop::collection::vec(prop::array::uniform4(action()), 1..80)) {
        let map = GridMap::bundled();
        let mut pos: Vec<Cell> = map.agent_starts().to_vec();
        for step in moves {
            for i in 0..pos.len() {
                let others: Vec<Cell> = pos.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &c)| c).collect();
                let out = map.step_agent(&others, &AgentState::new(pos[i], 800.0), step[i], 1.0);
                pos[i] = out.next_pos;
            }
            let mut sorted = pos.clone();
            sorted.sort();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), pos.len());
        }
    }

    #[test]
    fn hover_predicts_no_move(c in cell()) {
        prop_assert_eq!(GridMap::bundled().predicted_next(c, Action::Hover), c);
    }

    #[test]
    fn received_power_falls_with_distance(d1 in 0.1..200.0f64, d2 in 0.1..200.0f64, los in any::<bool>()) {
        let cfg = RadioConfig::default();
        let (near, far) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        prop_assert!(received_power_dbm(&cfg, near, los, 0.0, 0.0) >= received_power_dbm(&cfg, far, los, 0.0, 0.0));
        let r = rssi_reward(&cfg, received_power_dbm(&cfg, far, los, 0.0, 0.0));
        prop_assert!(r > 0.0 && r <= 1.0);
    }

    #[test]
    fn ranging_variance_is_inverse_in_snr(snr in 1e-3..1e9f64) {
        let cfg = RadioConfig::default();
        let k = ranging_variance(&cfg, 1.0).unwrap();
        let v = ranging_variance(&cfg, snr).unwrap();
        prop_assert!((v * snr - k).abs() <= 1e-12 * k);
    }

    #[test]
    fn peb_matches_numeric_inverse(a in 0.1..100.0f64, d in 0.1..100.0f64, t in -0.9..0.9f64) {
        let b = t * (a * d).sqrt();
        let m = Matrix2::new(a, b, b, d);
        let inv = m.try_inverse().unwrap();
        let want = inv.trace().sqrt();
        let got = peb(&FisherInfo(m), 1e-12).peb;
        prop_assert!((got - want).abs() <= 1e-10 * want);
    }

    #[test]
    fn extra_agent_never_hurts(
        x1 in -30.0..30.0f64, y1 in -30.0..30.0f64,
        x2 in -30.0..30.0f64, y2 in -30.0..30.0f64,
        x3 in -30.0..30.0f64, y3 in -30.0..30.0f64,
    ) {
        let t = Vector2::new(0.3, 0.7);
        let f = |x: f64, y: f64| agent_fim(t, Vector2::new(x, y), 1.0, &Matrix2::zeros()).unwrap();
        let base = peb(&total_fim([f(x1, y1), f(x2, y2)]), 1e-12);
        prop_assume!(base.well_conditioned);
        let more = peb(&total_fim([f(x1, y1), f(x2, y2), f(x3, y3)]), 1e-12);
        prop_assert!(more.peb <= base.peb * (1.0 + 1e-9));
    }

    #[test]
    fn agent_fim_is_rank_one(x in -30.0..30.0f64, y in -30.0..30.0f64, var in 1e-3..50.0f64, gd in any::<bool>()) {
        prop_assume!(x.hypot(y) > 1e-3);
        let cov = gps_covariance(&GpsModel::default(), gd);
        let j = agent_fim(Vector2::zeros(), Vector2::new(x, y), var, &cov).unwrap();
        let total = var + if gd { 100.0 } else { 0.0 };
        prop_assert!((j.trace() - 1.0 / total).abs() <= 1e-12 / total);
        prop_assert!(j.determinant().abs() <= 1e-15);
    }

    #[test]
    fn more_gps_noise_never_helps(s1 in 0.0..200.0f64, s2 in 0.0..200.0f64) {
        let t = Vector2::new(0.0, 0.0);
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        let peb_at = |s: f64| {
            let cov = Matrix2::from_diagonal_element(s);
            let j = total_fim([
                agent_fim(t, Vector2::new(5.0, 0.0), 0.5, &cov).unwrap(),
                agent_fim(t, Vector2::new(0.0, 7.0), 0.5, &cov).unwrap(),
            ]);
            peb(&j, 1e-12).peb
        };
        prop_assert!(peb_at(lo) <= peb_at(hi) * (1.0 + 1e-12));
    }

    #[test]
    fn motivation_is_monotone(b1 in 0.0..800.0f64, b2 in 0.0..800.0f64, t1 in 0.0..800.0f64, t2 in 0.0..800.0f64) {
        let p = MotivationParams::for_budget(800);
        let (blo, bhi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        let (tlo, thi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        prop_assert!(motivation(&p, bhi, t1) <= motivation(&p, blo, t1));
        prop_assert!(motivation(&p, b1, tlo) <= motivation(&p, b1, thi));
    }

    #[test]
    fn softmax_shift_invariant(w in scores(), c in -100.0..100.0f64, kappa in 0.01..10.0f64) {
        let shifted = w.map(|x| x + c);
        let (p, q) = (softmax_probs(&w, kappa), softmax_probs(&shifted, kappa));
        for i in 0..5 {
            prop_assert!((p[i] - q[i]).abs() < 1e-9);
        }
        prop_assert_eq!(argmax(&w), argmax(&shifted));
    }

    #[test]
    fn updates_touch_one_entry(s in 0..6usize, i in 0..5usize, delta in -5.0..5.0f64) {
        let mut q = QTable::new(6);
        q_update(&mut q, s, Action::ALL[i], delta, 0.3);
        let changed = q.values().iter().filter(|&&x| x != 0.0).count();
        prop_assert!(changed <= 1);
        let mut v = VTable::new(6);
        v_update(&mut v, s, Some((s + 1) % 6), delta, 0.3, 0.9);
        prop_assert!(v.values().iter().filter(|&&x| x != 0.0).count() <= 1);
    }

    #[test]
    fn schedules_decay_to_floor(e1 in 0..5000usize, e2 in 0..5000usize) {
        let s = Schedule { initial: 0.55, decay: 0.9985, floor: 0.09 };
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        prop_assert!(s.at(hi) <= s.at(lo));
        prop_assert!(s.at(hi) >= 0.09);
    }

    #[test]
    fn reliability_matches_dirichlet_moments(l0 in 0.1..500.0f64, l1 in 0.1..500.0f64, l2 in 0.1..500.0f64) {
        let total = l0 + l1 + l2;
        let mean = l0 / total;
        let var = l0 * (total - l0) / (total * total * (total + 1.0));
        let want = mean * mean / var;
        let got = reliability_score(&[l0, l1, l2]);
        prop_assert!((got - want).abs() <= 1e-10 * want);
    }
}
