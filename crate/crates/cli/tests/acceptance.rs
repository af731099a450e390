//! Acceptance checks, one line per criterion. Exits nonzero if any fails.

#[path = "../../core/tests/support/oracles.rs"]
#[allow(dead_code)]
mod oracles;

use std::time::Instant;

use dout::commands::sweep_scenario;
use dout::scenario_file::parse_scenario;
use dout_core::exponents::{
    dmt_curve, empirical_slope, expected_sep_exponent, expected_tx_exponent, informed_exponent,
    separation_exponent,
};
use dout_core::mutual_info::discrete_input_mi;
use dout_core::outage::siso_gaussian_outage_closed_form;
use dout_core::{
    db_to_linear, optimal_separation_rate, run_sweep, ChannelInput, ChannelRealization,
    Constellation, DistortionSpec, MiEstimatorSettings, Scenario, SourceModel, SystemConfig,
};
use num_complex::Complex64;

const RATE_TOL: f64 = 1e-3;
const SLOPE_TARGET: f64 = 4.0;
const SLOPE_TOL: f64 = 0.5;
const MI_HIGH_TOL: f64 = 0.01;
const MI_SIGMAS: f64 = 3.0;
const CI_LEVEL: f64 = 0.99;
const MIN_COVERED: usize = 9;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ok_if(pass: bool, detail: String) -> Check {
    if pass {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn boxed<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn optimal_rates() -> Check {
    let a = boxed(optimal_separation_rate(0.05, 2.0))?;
    let b = boxed(optimal_separation_rate(0.06, 1.5))?;
    ok_if(
        (a - 1.08).abs() <= RATE_TOL && (b - 1.353).abs() <= RATE_TOL,
        format!("R_c*(0.05, 2) = {a:.6}, R_c*(0.06, 1.5) = {b:.6}"),
    )
}

fn exponent_table() -> Check {
    let c44 = boxed(SystemConfig::new(4, 4, 2))?;
    let c22 = boxed(SystemConfig::new(2, 2, 2))?;
    let bpsk = ChannelInput::Discrete(boxed(Constellation::psk(1))?);
    let got = [
        boxed(informed_exponent(&c44, &ChannelInput::Gaussian, 2.0, 0.05))?.value,
        boxed(separation_exponent(&c22, &ChannelInput::Gaussian, 1.08))?.value,
        boxed(separation_exponent(&c22, &bpsk, 1.353))?.value,
        boxed(separation_exponent(&c22, &bpsk, 1.7))?.value,
    ];
    ok_if(
        got == [32.0, 8.0, 4.0, 2.0],
        format!("got {got:?}, want [32, 8, 4, 2]"),
    )
}

fn siso_vs_closed_form() -> Check {
    let grid: Vec<f64> = (0..10).map(|i| 25.0 * i as f64 / 9.0).collect();
    let mut s = boxed(Scenario::new(
        boxed(SystemConfig::new(1, 1, 1))?,
        ChannelInput::Gaussian,
        boxed(SourceModel::new(1.0))?,
        boxed(DistortionSpec::new(0.25, 0.5))?,
        grid,
        1_000_000,
        2024,
    ))?;
    s.confidence = CI_LEVEL;
    let threshold = boxed(s.informed_threshold())?;
    let result = boxed(run_sweep(&s, workers()))?;
    let mut covered = 0;
    for row in &result.rows {
        let exact = boxed(siso_gaussian_outage_closed_form(
            db_to_linear(row.snr_db),
            threshold,
        ))?;
        if row.informed.ci_contains(exact) {
            covered += 1;
        }
    }
    ok_if(
        covered >= MIN_COVERED && (threshold - 1.0).abs() < 1e-12,
        format!("{covered}/10 points inside the 99% CI (R = {threshold})"),
    )
}

fn mimo2x2_text(blocks: usize, trials: u64) -> String {
    format!(
        "[system]\nnt = 2\nnr = 2\nblocks = {blocks}\n\n[input]\nkind = \"gaussian\"\n\n\
         [source]\nbandwidth_ratio = 2\n\n[distortion]\ntarget = 0.05\nd0 = 0.5\n\n\
         [separation]\nrate = \"optimal\"\n\n[sweep]\nsnr_db_start = 0\nsnr_db_stop = 20\n\
         snr_db_step = 1\ntrials = {trials}\nseed = 3\n"
    )
}

fn separation_matches_informed() -> Check {
    let mut rows = 0;
    for blocks in [1, 2] {
        let loaded = boxed(parse_scenario(&mimo2x2_text(blocks, 200_000), "mimo2x2"))?;
        let result = boxed(run_sweep(&loaded.scenario, workers()))?;
        for row in &result.rows {
            let sep = row.separation.as_ref().ok_or("separation missing")?;
            if sep.outage_count != row.informed.outage_count {
                return Err(format!(
                    "N={blocks} at {} dB: separation {} vs informed {}",
                    row.snr_db, sep.outage_count, row.informed.outage_count
                ));
            }
            rows += 1;
        }
    }
    Ok(format!(
        "counts equal at all {rows} (N, SNR) points, 2e5 trials each"
    ))
}

fn slope_n1() -> Check {
    let grid: Vec<f64> = (0..=16).map(|i| 3.0 + 0.5 * i as f64).collect();
    let s = boxed(
        Scenario::new(
            boxed(SystemConfig::new(2, 2, 1))?,
            ChannelInput::Gaussian,
            boxed(SourceModel::new(2.0))?,
            boxed(DistortionSpec::new(0.05, 0.5))?,
            grid,
            2_000_000,
            77,
        )
        .and_then(Scenario::with_optimal_rate),
    )?;
    let result = boxed(run_sweep(&s, workers()))?;
    let points: Vec<(f64, f64)> = result
        .rows
        .iter()
        .filter(|r| (1e-4..=1e-2).contains(&r.informed.p_hat))
        .map(|r| (db_to_linear(r.snr_db), r.informed.p_hat))
        .collect();
    let fit = boxed(empirical_slope(&points))?;
    ok_if(
        (fit.slope - SLOPE_TARGET).abs() <= SLOPE_TOL,
        format!(
            "slope {:.3} from {} rows with p in [1e-4, 1e-2], 2e6 trials each",
            fit.slope, fit.points
        ),
    )
}

fn bpsk_mi() -> Check {
    let bpsk = boxed(Constellation::psk(1))?;
    let h = ChannelRealization::scalar(Complex64::new(1.0, 0.0));
    let settings = MiEstimatorSettings {
        noise_samples: 20_000,
        mi_seed: 99,
    };
    let high = boxed(discrete_input_mi(&h, 1e6, &bpsk, &settings, 0))?;
    let zero = boxed(discrete_input_mi(&h, 0.0, &bpsk, &settings, 1))?;
    let one = boxed(discrete_input_mi(&h, 1.0, &bpsk, &settings, 2))?;
    let oracle = oracles::bpsk_siso_mi(1.0, 64);
    let pass = (high.bits - 1.0).abs() <= MI_HIGH_TOL
        && zero.bits.abs() <= MI_SIGMAS * zero.std_error
        && (one.bits - oracle).abs() <= MI_SIGMAS * one.std_error;
    ok_if(
        pass,
        format!(
            "I(1e6) = {:.6}; I(0) = {:.3e} (se {:.1e}); I(1) = {:.5} +- {:.1e} vs quadrature {oracle:.5}",
            high.bits, zero.bits, zero.std_error, one.bits, one.std_error
        ),
    )
}

fn exponent_properties() -> Check {
    let configs = [(2, 2, 1), (2, 2, 2), (4, 4, 2), (2, 3, 3), (3, 1, 2)];
    let b_grid: Vec<f64> = (1..=60).map(|i| 0.1 * i as f64).collect();
    for &(nt, nr, n) in &configs {
        let c = boxed(SystemConfig::new(nt, nr, n))?;
        let full = c.full_diversity() as f64;
        let sat = (2 * c.min_antennas() - 1 + nt.abs_diff(nr)) as f64;
        let mut prev = (0.0, 0.0, 0.0);
        for &b in &b_grid {
            let tx = boxed(expected_tx_exponent(&c, b))?.value;
            let sep = boxed(expected_sep_exponent(&c, b))?;
            if tx > full + 1e-12 || ((tx - full).abs() < 1e-12) != (2.0 * b / n as f64 >= sat) {
                return Err(format!(
                    "{nt}x{nr} N={n} b={b}: d_exp^tx = {tx}, full = {full}"
                ));
            }
            let cur = (tx, sep.formula.value, sep.oracle);
            if cur.0 < prev.0 - 1e-12 || cur.1 < prev.1 - 1e-9 || cur.2 < prev.2 - 1e-9 {
                return Err(format!("{nt}x{nr} N={n}: exponents decrease at b={b}"));
            }
            prev = cur;
        }
        let top = c.min_antennas();
        if boxed(dmt_curve(&c, 0.0))? != full || boxed(dmt_curve(&c, top as f64))? != 0.0 {
            return Err(format!("{nt}x{nr} N={n}: DMT endpoints wrong"));
        }
        let rs: Vec<f64> = (0..=200).map(|i| top as f64 * i as f64 / 200.0).collect();
        let d: Vec<f64> = rs
            .iter()
            .map(|&r| dmt_curve(&c, r))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        if d.windows(3).any(|w| w[0] + w[2] < 2.0 * w[1] - 1e-9) {
            return Err(format!("{nt}x{nr} N={n}: DMT not convex"));
        }
    }
    let mut checked = 0;
    for (input, cfg) in [
        (Constellation::psk(1), (2, 2, 2)),
        (Constellation::qam(4), (2, 2, 3)),
    ] {
        let input = ChannelInput::Discrete(boxed(input)?);
        let c = boxed(SystemConfig::new(cfg.0, cfg.1, cfg.2))?;
        for i in 0..10 {
            for j in 0..10 {
                let b = 0.3 + 0.4 * i as f64;
                let target = 0.01 + 0.1 * j as f64;
                let rate = boxed(optimal_separation_rate(target, b))?;
                let inf = boxed(informed_exponent(&c, &input, b, target))?.value;
                let sep = boxed(separation_exponent(&c, &input, rate))?.value;
                if inf != sep {
                    return Err(format!(
                        "b={b} target={target}: informed {inf} vs separation {sep}"
                    ));
                }
                checked += 1;
            }
        }
    }
    Ok(format!(
        "{} configs x {} b values; informed = separation on {checked} (b, target) pairs",
        configs.len(),
        b_grid.len()
    ))
}

fn determinism() -> Check {
    let qpsk = "[system]\nnt = 1\nnr = 2\nblocks = 2\n\n[input]\nkind = \"discrete\"\n\
                constellation = \"qpsk\"\nnoise_samples = 64\n\n[source]\nbandwidth_ratio = 1\n\n\
                [distortion]\ntarget = 0.3\n\n[separation]\nrate = 1.0\n\n[sweep]\n\
                snr_db_start = 0\nsnr_db_stop = 12\nsnr_db_step = 4\ntrials = 997\nseed = 5\n";
    let mut compared = 0;
    for text in [mimo2x2_text(2, 20_011), qpsk.to_string()] {
        let loaded = boxed(parse_scenario(&text, "det"))?;
        let reference = boxed(sweep_scenario(&loaded, 1, None))?.table;
        for w in [2, 3, 8] {
            if boxed(sweep_scenario(&loaded, w, None))?.table != reference {
                return Err(format!("CSV differs between 1 and {w} workers"));
            }
            compared += 1;
        }
    }
    Ok(format!(
        "{compared} reruns (2, 3, 8 workers) byte-identical to 1 worker"
    ))
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("optimal separation rates", optimal_rates),
        ("analytic exponent table", exponent_table),
        ("SISO Monte Carlo vs closed form", siso_vs_closed_form),
        (
            "separation counts equal informed counts",
            separation_matches_informed,
        ),
        ("empirical slope 2x2 N=1", slope_n1),
        ("discrete MI properties", bpsk_mi),
        ("exponent property suite", exponent_properties),
        ("determinism across worker counts", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
