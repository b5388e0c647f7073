//! The built-in identity suite: every interval identity and closed-form
//! error model checked over randomized scenarios, plus a hand-computed
//! micro-case and the localization round trip. Fully deterministic, so two
//! runs print byte-identical tables.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error_models::predict;
use crate::estimators::{
    drift_ratio_alt_ds, estimate, listener_ratio_ds, tdoa_dc_a, tof_dc_a, tof_raw, RatioSource,
};
use crate::geometry::{ground_truth, GroundTruth, Position};
use crate::localization::{solve, SolverConfig, TdoaMeasurement};
use crate::protocol::{
    run_exchange_from_truth, timeline_oracle_from_truth, ExchangeClocks, NoiseModel,
    ProtocolTiming, Variant,
};
use crate::ratio::Ratio;
use crate::timebase::{ClockModel, TickDuration, TickInstant};

const IDENTITY_SCENARIOS: usize = 10_000;
const SUITE_SEED: u64 = 0x7D0A_5EED;

#[derive(Clone, Debug)]
pub struct SelftestEntry {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct SelftestReport {
    pub entries: Vec<SelftestEntry>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "self-test over {IDENTITY_SCENARIOS} randomized scenarios")?;
        for entry in &self.entries {
            let status = if entry.passed { "pass" } else { "FAIL" };
            writeln!(f, "[{status}] {:<44} {}", entry.name, entry.detail)?;
        }
        writeln!(
            f,
            "result: {}",
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

/// One randomized scenario with nanosecond-aligned true intervals and
/// integer-ppm drifts, so every local measurement is exact and the ratio
/// identities hold to full precision.
struct Case {
    truth: GroundTruth,
    clocks: ExchangeClocks,
    timing: ProtocolTiming,
}

fn random_case<R: Rng>(rng: &mut R) -> Case {
    let ppm = |rng: &mut R| rng.random_range(-50i64..=50) as f64;
    let clocks = ExchangeClocks {
        a: ClockModel::from_ppm("a", ppm(rng), TickDuration::ZERO).unwrap(),
        b: ClockModel::from_ppm("b", ppm(rng), TickDuration::ZERO).unwrap(),
        t: ClockModel::from_ppm("t", ppm(rng), TickDuration::ZERO).unwrap(),
    };
    // Geometry within 300 m: flight times up to 1 us.
    let tof_ab = rng.random_range(1i128..=1000);
    let tof_at = rng.random_range(0i128..=1000);
    let tof_bt = rng.random_range((tof_at - tof_ab).max(0)..=tof_at + tof_ab);
    let truth = GroundTruth::from_tofs(
        TickDuration::from_ns(tof_ab),
        TickDuration::from_ns(tof_at),
        TickDuration::from_ns(tof_bt),
    )
    .unwrap();
    let timing = ProtocolTiming::double_sided(
        TickDuration::from_ns(rng.random_range(100_000i128..=10_000_000)),
        TickDuration::from_ns(rng.random_range(100_000i128..=10_000_000)),
    );
    Case {
        truth,
        clocks,
        timing,
    }
}

struct MaxTracker {
    max: i128,
    bound: i128,
}

impl MaxTracker {
    fn new(bound: i128) -> Self {
        MaxTracker { max: 0, bound }
    }

    fn record(&mut self, deviation: i128) {
        self.max = self.max.max(deviation.abs());
    }

    fn entry(self, name: &'static str) -> SelftestEntry {
        SelftestEntry {
            name,
            passed: self.max <= self.bound,
            detail: format!("max deviation {} fs (bound {} fs)", self.max, self.bound),
        }
    }
}

/// `|actual - expected| <= expected_abs / 10^15`, in exact arithmetic.
fn within_rel_1e15(actual: &Ratio, expected: &Ratio) -> bool {
    let diff = (actual.clone() - expected.clone()).abs();
    diff * Ratio::from_int(1_000_000_000_000_000) <= expected.abs()
}

pub fn selftest() -> SelftestReport {
    let mut entries = Vec::new();
    identity_suite(&mut entries);
    micro_case(&mut entries);
    localization_round_trip(&mut entries);
    SelftestReport { entries }
}

fn identity_suite(entries: &mut Vec<SelftestEntry>) {
    let mut rng = ChaCha12Rng::seed_from_u64(SUITE_SEED);

    let mut round_identity = MaxTracker::new(0);
    let mut ds_symmetry = MaxTracker::new(0);
    let mut listener_gap = MaxTracker::new(0);
    let mut listener_sum = MaxTracker::new(0);
    let mut raw_tof_model = MaxTracker::new(2);
    let mut corrected_tof_model = MaxTracker::new(2);
    let mut raw_tdoa_model = MaxTracker::new(4);
    let mut corrected_tdoa_model = MaxTracker::new(4);
    let mut alt_ratio_exact = true;
    let mut listener_ratio_exact = true;
    let mut listener_ratio_position_free = true;

    for i in 0..IDENTITY_SCENARIOS {
        let case = random_case(&mut rng);
        let oracle = timeline_oracle_from_truth(
            &case.truth,
            &case.clocks,
            &case.timing,
            Variant::Ds,
            TickInstant::from_fs((i as i128) * 1_000_000_000),
        )
        .expect("valid case");
        let iv = oracle.true_intervals;

        // True-interval identities, exact.
        round_identity
            .record((iv.r_a - (case.truth.tof_ab * 2 + iv.d_b)).as_fs());
        ds_symmetry.record(
            ((iv.r_a + iv.d_a.unwrap()) - (iv.d_b + iv.r_b.unwrap())).as_fs(),
        );
        listener_gap.record(
            (iv.m_a - ((case.truth.tof_ab - case.truth.tof_at) + iv.d_b + case.truth.tof_bt))
                .as_fs(),
        );
        listener_sum.record(
            ((iv.r_a + iv.d_a.unwrap()) - (iv.m_a + iv.m_b.unwrap())).as_fs(),
        );

        // Simulated estimates against the closed-form error models.
        let mut sim_rng = ChaCha12Rng::seed_from_u64(SUITE_SEED ^ i as u64);
        let record = run_exchange_from_truth(
            &case.truth,
            &case.clocks,
            &case.timing,
            Variant::Ds,
            &NoiseModel::none(),
            &mut sim_rng,
        )
        .expect("valid case");
        let prediction = predict(&case.truth, &case.timing, &case.clocks);

        let raw = tof_raw(&record);
        raw_tof_model
            .record(((raw - case.truth.tof_ab) - prediction.raw_tof_err).as_fs());

        let exact_ab = case.clocks.a.factor() / case.clocks.b.factor();
        let corrected = tof_dc_a(&record, &exact_ab);
        corrected_tof_model
            .record(((corrected - case.truth.tof_ab) - prediction.dc_a_tof_err).as_fs());

        let alt = drift_ratio_alt_ds(&record).expect("ds record");
        alt_ratio_exact &= within_rel_1e15(&alt, &exact_ab);

        let set = estimate(&record, RatioSource::Cfo).expect("cfo ratios present");
        raw_tdoa_model
            .record(((set.tdoa.raw_a - case.truth.td) - prediction.raw_tdoa_err).as_fs());
        let exact_at = case.clocks.a.factor() / case.clocks.t.factor();
        let tdoa_corrected = tdoa_dc_a(&record, corrected, &exact_at);
        corrected_tdoa_model
            .record(((tdoa_corrected - case.truth.td) - prediction.dc_a_tdoa_err).as_fs());

        let listener = listener_ratio_ds(&record).expect("ds record");
        let exact_ta = case.clocks.t.factor() / case.clocks.a.factor();
        listener_ratio_exact &= within_rel_1e15(&listener, &exact_ta);

        // Listener-position independence, spot-checked on a subset.
        if i % 100 == 0 {
            let ab_ns = case.truth.tof_ab.as_fs() / crate::timebase::FS_PER_NANOSECOND;
            for _ in 0..3 {
                let at_ns = sim_rng.random_range(0i128..=1000);
                let bt_ns = sim_rng.random_range((at_ns - ab_ns).max(0)..=at_ns + ab_ns);
                let moved_truth = GroundTruth::from_tofs(
                    case.truth.tof_ab,
                    TickDuration::from_ns(at_ns),
                    TickDuration::from_ns(bt_ns),
                )
                .expect("triangle");
                let rec2 = run_exchange_from_truth(
                    &moved_truth,
                    &case.clocks,
                    &case.timing,
                    Variant::Ds,
                    &NoiseModel::none(),
                    &mut sim_rng,
                )
                .expect("valid case");
                let ratio = listener_ratio_ds(&rec2).expect("ds record");
                listener_ratio_position_free &= ratio == listener;
            }
        }
    }

    entries.push(round_identity.entry("round-time identity (r_a = 2 tof + d_b)"));
    entries.push(ds_symmetry.entry("ds interval symmetry (r_a + d_a = d_b + r_b)"));
    entries.push(listener_gap.entry("listener gap identity (m_a from the timeline)"));
    entries.push(listener_sum.entry("listener sum identity (r_a + d_a = m_a + m_b)"));
    entries.push(raw_tof_model.entry("raw tof error model"));
    entries.push(corrected_tof_model.entry("drift-corrected tof error model"));
    entries.push(SelftestEntry {
        name: "alt-ds drift ratio exactness",
        passed: alt_ratio_exact,
        detail: "relative deviation <= 1e-15 from k_a/k_b".to_string(),
    });
    entries.push(raw_tdoa_model.entry("raw tdoa error model"));
    entries.push(corrected_tdoa_model.entry("drift-corrected tdoa error model"));
    entries.push(SelftestEntry {
        name: "listener ratio exactness",
        passed: listener_ratio_exact && listener_ratio_position_free,
        detail: "relative deviation <= 1e-15 from k_t/k_a, position-independent".to_string(),
    });
}

fn micro_case(entries: &mut Vec<SelftestEntry>) {
    // tof_ab 100 ns, delays 1 ms / 0.5 ms, drifts +10/-5/+20 ppm,
    // listener tofs 50 ns / 80 ns.
    let truth = GroundTruth::from_tofs(
        TickDuration::from_ns(100),
        TickDuration::from_ns(50),
        TickDuration::from_ns(80),
    )
    .unwrap();
    let clocks = ExchangeClocks {
        a: ClockModel::from_ppm("a", 10.0, TickDuration::ZERO).unwrap(),
        b: ClockModel::from_ppm("b", -5.0, TickDuration::ZERO).unwrap(),
        t: ClockModel::from_ppm("t", 20.0, TickDuration::ZERO).unwrap(),
    };
    let timing =
        ProtocolTiming::double_sided(TickDuration::from_ms(1), TickDuration::from_us(500));
    let mut rng = ChaCha12Rng::seed_from_u64(0);
    let record = run_exchange_from_truth(
        &truth,
        &clocks,
        &timing,
        Variant::Ds,
        &NoiseModel::none(),
        &mut rng,
    )
    .unwrap();

    let raw_err = tof_raw(&record) - truth.tof_ab;
    let ratio_ab = clocks.a.factor() / clocks.b.factor();
    let corrected_err = tof_dc_a(&record, &ratio_ab) - truth.tof_ab;
    let ratio_at = clocks.a.factor() / clocks.t.factor();
    let tdoa = tdoa_dc_a(&record, tof_dc_a(&record, &ratio_ab), &ratio_at);
    let tdoa_err = (tdoa - truth.td).as_fs().abs();
    let tdoa_bound = (clocks.a.drift().clone() * truth.td.to_ratio())
        .round_to_i128()
        .abs()
        + 4;

    let passed = raw_err == TickDuration::from_fs(7_501_000)
        && corrected_err == TickDuration::from_ps(1)
        && tdoa_err <= tdoa_bound;
    entries.push(SelftestEntry {
        name: "worked micro-case",
        passed,
        detail: format!(
            "raw tof error {raw_err} (want 7501000 fs), corrected {corrected_err} (want 1000 fs), \
             |tdoa error| {tdoa_err} fs (bound {tdoa_bound} fs)"
        ),
    });
}

fn localization_round_trip(entries: &mut Vec<SelftestEntry>) {
    let anchors = [
        Position::new(-50.0, -50.0),
        Position::new(50.0, -50.0),
        Position::new(50.0, 50.0),
        Position::new(-50.0, 50.0),
    ];
    let mut rng = ChaCha12Rng::seed_from_u64(SUITE_SEED ^ 0xF1);
    let config = SolverConfig::default();
    let runs = 1000;
    let mut good = 0;
    let mut all_within_iterations = true;
    for _ in 0..runs {
        let tag = Position::new(rng.random_range(-49.0..49.0), rng.random_range(-49.0..49.0));
        let measurements: Vec<TdoaMeasurement> = anchors[1..]
            .iter()
            .map(|&other| {
                TdoaMeasurement::new(anchors[0], other, ground_truth(anchors[0], other, tag).td)
            })
            .collect();
        let fix = solve(&measurements, None, &config).expect("enough measurements");
        all_within_iterations &= fix.iterations <= 50;
        if fix.converged && fix.position.distance_to(&tag) < 1e-6 {
            good += 1;
        }
    }
    entries.push(SelftestEntry {
        name: "localization round-trip",
        passed: good * 100 >= runs * 99 && all_within_iterations,
        detail: format!(
            "{good}/{runs} noise-free fixes within 1e-6 m, each within 50 iterations"
        ),
    });
}
