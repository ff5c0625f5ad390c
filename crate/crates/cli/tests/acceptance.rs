//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

#[path = "../../core/tests/common/oracles.rs"]
mod oracles;

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wpekit::asv::{eer, min_dcf, DcfParams, TrialScoreSet};
use wpekit::features::{
    composite_losses, l1_loss, l2_loss, log_spectral_distance, mfcc_mae, residual_reverb_snr, Composite,
    CompositeInputs, LossWeights, ToyEmbedder,
};
use wpekit::room::{self, sources, RirGenerator, DEFAULT_EARLY_BOUNDARY_MS};
use wpekit::signal::{istft, relative_l2, stft, Spectrogram, StftConfig, TimeSignal, SAMPLE_RATE};
use wpekit::wpe::{
    dereverberate, estimate_psd, vace_dereverberate, wpe_filter_estimate, PsdEstimate, PsdMode, WpeConfig,
};

use oracles::{brute_eer, brute_min_dcf, naive_loaded_system, pinv_solution, random_data, rel_err_c, tiny_spec};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(limit_s: f64, start: Instant, pass: bool, detail: String) -> Outcome {
    let secs = start.elapsed().as_secs_f64();
    let in_time = secs < limit_s;
    outcome(pass && in_time, format!("{detail}; {secs:.1} s (limit {limit_s} s)"))
}

// ---------------------------------------------------------------- 1

fn stft_fidelity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let len = rng.gen_range(SAMPLE_RATE as usize..=10 * SAMPLE_RATE as usize);
        let x: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = TimeSignal::mono(x, SAMPLE_RATE).unwrap();
        let cfg = if i % 2 == 0 { StftConfig::dereverb() } else { StftConfig::features() };
        let y = istft(&stft(&x, &cfg).unwrap()).unwrap();
        worst = worst.max(relative_l2(&y, &x).unwrap());
    }
    timed(10.0, start, worst <= 1e-6, format!("max relative error {worst:.2e} over 100 signals (bound 1e-6)"))
}

// ---------------------------------------------------------------- 2

fn wpe_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let d = rng.gen_range(1..=2);
        let t = rng.gen_range(1..=32);
        let f = [3, 5, 9][rng.gen_range(0..3)];
        let delay = rng.gen_range(1..=3);
        let taps = rng.gen_range(1..=3);
        let data = random_data(&mut rng, d, t, f);
        let lambda = Array2::from_shape_simple_fn((t, f), || rng.gen_range(0.1..2.0));
        let spec = tiny_spec(data.clone());
        let psd = PsdEstimate::new(lambda.clone(), PsdMode::External).unwrap();
        let cfg = WpeConfig { delay, taps, ..WpeConfig::single() };
        let g = wpe_filter_estimate(&spec, &psd, &cfg).unwrap();
        for bin in 0..f {
            let (r, p) = naive_loaded_system(&data, &lambda, bin, delay, taps, cfg.diag_load);
            let want = pinv_solution(&r, &p);
            let err = rel_err_c(
                g.bin(bin).iter().copied(),
                (0..d * taps).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| want[(i, j)]),
            );
            worst = worst.max(err);
        }
    }
    timed(30.0, start, worst <= 1e-8, format!("max relative deviation {worst:.2e} over 200 instances (bound 1e-8)"))
}

// ---------------------------------------------------------------- 3

const PASSTHROUGH_SECONDS: f64 = 40.0;

fn passthrough() -> Outcome {
    let cfg = StftConfig::dereverb();
    let wpe = WpeConfig { delay: 3, taps: 15, iterations: 1, psd_mode: PsdMode::Observed, ..WpeConfig::vace() };
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let cases: Vec<(f64, f64, u64)> =
        (0..20).map(|_| (rng.gen_range(300.0..=900.0), rng.gen_range(3.0..=20.0), rng.gen())).collect();
    let mut worst: [f64; 2] = [0.0, 0.0];
    let mut within = 0;
    for &(t60, snr, seed) in &cases {
        let source = sources::speech_like(PASSTHROUGH_SECONDS, seed);
        let rir = RirGenerator::new(t60, 5.0, t60 * 1.2).generate(seed ^ 1).unwrap();
        let split = room::split_rir(&rir, DEFAULT_EARLY_BOUNDARY_MS).unwrap();
        let early = room::convolve(&source, &split.early_rir).unwrap();
        let noise = sources::babble_noise(1, early.len(), seed ^ 2);
        let (noisy, _) = room::mix_at_snr(&early, &noise, snr).unwrap();
        let mut ok = true;
        for (k, input) in [early, noisy].iter().enumerate() {
            let out = dereverberate(&stft(input, &cfg).unwrap(), &wpe, None, None).unwrap();
            let dev = relative_l2(&istft(&out).unwrap(), input).unwrap();
            worst[k] = worst[k].max(dev);
            ok &= dev <= 0.05;
        }
        within += ok as usize;
    }
    outcome(
        within == cases.len(),
        format!(
            "{within}/20 utterances within 5% ({PASSTHROUGH_SECONDS} s each); worst deviation noiseless {:.2}%, noisy {:.2}%",
            100.0 * worst[0],
            100.0 * worst[1]
        ),
    )
}

// ---------------------------------------------------------------- 4 and 5

const EFFICACY_SECONDS: f64 = 10.0;

struct Utterance {
    obs: room::ObservationSet,
}

fn utterance(rng: &mut ChaCha8Rng, channels: usize, seconds: f64) -> Utterance {
    let t60: f64 = rng.gen_range(300.0..=900.0);
    let snr: f64 = rng.gen_range(3.0..=20.0);
    let seed: u64 = rng.gen();
    let source = sources::speech_like(seconds, seed);
    let rir = RirGenerator { channels, ..RirGenerator::new(t60, 5.0, t60 * 1.2) }.generate(seed ^ 1).unwrap();
    let bundle = room::split_rir(&rir, DEFAULT_EARLY_BOUNDARY_MS).unwrap().bundle;
    let noise = sources::babble_noise(channels, source.len(), seed ^ 2);
    Utterance { obs: room::simulate(&source, &bundle, &noise, snr, seed ^ 3).unwrap() }
}

fn efficacy() -> Outcome {
    let start = Instant::now();
    let cfg = StftConfig::dereverb();
    let wpe = WpeConfig { taps: 30, iterations: 3, psd_mode: PsdMode::Iterative, ..WpeConfig::single() };
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let (mut lsd_better, mut gain_sum) = (0, 0.0);
    for _ in 0..20 {
        let u = utterance(&mut rng, 1, EFFICACY_SECONDS);
        let y = stft(&u.obs.observed, &cfg).unwrap();
        let z = istft(&dereverberate(&y, &wpe, None, None).unwrap()).unwrap();
        let target = stft(&u.obs.early_clean, &cfg).unwrap();
        let lsd_in = log_spectral_distance(&y, &target).unwrap();
        let lsd_out = log_spectral_distance(&stft(&z, &cfg).unwrap(), &target).unwrap();
        lsd_better += (lsd_out < lsd_in) as usize;
        let snr_in = residual_reverb_snr(&u.obs.observed, &u.obs.early_noisy).unwrap();
        let snr_out = residual_reverb_snr(&z, &u.obs.early_noisy).unwrap();
        gain_sum += snr_out - snr_in;
    }
    let gain = gain_sum / 20.0;
    timed(
        120.0,
        start,
        lsd_better >= 18 && gain >= 3.0,
        format!("LSD improved on {lsd_better}/20 (need 18); mean residual-reverb SNR gain {gain:.2} dB (need 3)"),
    )
}

fn dual_channel_gain() -> Outcome {
    let cfg = StftConfig::dereverb();
    let wpe = WpeConfig::vace();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut wins = 0;
    let mut ratio_db = 0.0;
    for _ in 0..20 {
        let u = utterance(&mut rng, 2, EFFICACY_SECONDS);
        let actual = stft(&u.obs.observed.select(0), &cfg).unwrap();
        let second = stft(&u.obs.observed.select(1), &cfg).unwrap();
        let target = u.obs.early_noisy.select(0);
        let residual = |spec: Spectrogram| istft(&spec).unwrap().sub(&target).unwrap().energy();
        let single = residual(dereverberate(&actual, &wpe, None, None).unwrap());
        let dual = residual(vace_dereverberate(&actual, &second, &wpe, None, None).unwrap());
        wins += (dual <= single) as usize;
        ratio_db += 10.0 * (single / dual).log10() / 20.0;
    }
    outcome(
        wins >= 18,
        format!("dual-channel residual no larger on {wins}/20 (need 18); mean advantage {ratio_db:.2} dB"),
    )
}

// ---------------------------------------------------------------- 6

fn loss_identities() -> Outcome {
    let cfg = StftConfig::dereverb();
    let (pw, fw) = (LossWeights::pretrain(), LossWeights::finetune());
    let spec = |x: &TimeSignal| stft(x, &cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut failures = Vec::new();
    let all = [Composite::Pretrain, Composite::Finetune, Composite::Tso, Composite::Dr, Composite::DrTso];
    for i in 0..100 {
        let secs = rng.gen_range(0.5..1.5);
        let v: Vec<TimeSignal> = (0..9).map(|_| sources::speech_like(secs, rng.gen())).collect();
        let w = LossWeights { eta: rng.gen_range(0.0..1.0), ..fw };
        let l1 = l1_loss(&spec(&v[0]), &spec(&v[1]), &v[0], &v[1], &w).unwrap();
        let l2 = l2_loss(&spec(&v[0]), &spec(&v[1]), &v[0], &v[1], &w).unwrap();
        if l2 != l1 + w.eta * mfcc_mae(&v[0], &v[1]).unwrap() {
            failures.push(format!("tuple {i}: L2 identity"));
        }
        let inputs = CompositeInputs {
            g_x1: Some(&v[0]),
            g_y1: Some(&v[1]),
            v_x1: Some(&v[2]),
            v_y1: Some(&v[3]),
            v_x1_early: Some(&v[4]),
            v_y1_early: Some(&v[5]),
            x1_late: Some(&v[6]),
            x1_early: Some(&v[7]),
            y1_early: Some(&v[8]),
        };
        let out = composite_losses(&inputs, &all, &pw, &fw, &cfg, &ToyEmbedder).unwrap();
        if out.l_dr_tso.unwrap() != out.l_tso.unwrap() + out.l_dr.unwrap() {
            failures.push(format!("tuple {i}: DR-TSO sum"));
        }

        let (x1_late, x1_early, y1_early) = (&v[6], &v[7], &v[8]);
        let same = CompositeInputs {
            g_x1: Some(x1_late),
            g_y1: Some(x1_late),
            v_x1: Some(x1_early),
            v_y1: Some(x1_early),
            v_x1_early: Some(x1_early),
            v_y1_early: Some(y1_early),
            x1_late: Some(x1_late),
            x1_early: Some(x1_early),
            y1_early: Some(y1_early),
        };
        let c = composite_losses(&same, &all, &pw, &fw, &cfg, &ToyEmbedder).unwrap();
        let ft_same = CompositeInputs { v_y1: Some(y1_early), ..same };
        let ft = composite_losses(&ft_same, &[Composite::Finetune], &pw, &fw, &cfg, &ToyEmbedder).unwrap();
        let got = (c.l_pt, ft.l_ft, c.l_tso, c.l_dr, c.l_dr_tso);
        if got != (Some(0.0), Some(0.0), Some(-2.0), Some(-2.0), Some(-4.0)) {
            failures.push(format!("tuple {i}: coincidence values {got:?}"));
        }
    }
    let detail = if failures.is_empty() {
        "100 tuples: L2 = L1 + eta*MAE and DR-TSO = TSO + DR bit-exact; coincidence values 0, 0, -2, -2, -4 exact"
            .to_string()
    } else {
        format!("{} violations, first: {}", failures.len(), failures[0])
    };
    outcome(failures.is_empty(), detail)
}

// ---------------------------------------------------------------- 7

fn random_trial_set(rng: &mut ChaCha8Rng) -> TrialScoreSet {
    let total = rng.gen_range(2..=200);
    let nt = rng.gen_range(1..total);
    let quantised = rng.gen_bool(0.5);
    let mut draw = |shift: f64| {
        let v: f64 = rng.gen_range(-1.0..1.0) + shift;
        if quantised {
            (v * 10.0).round() / 10.0
        } else {
            v
        }
    };
    let t = (0..nt).map(|_| draw(0.5)).collect();
    let n = (0..total - nt).map(|_| draw(0.0)).collect();
    TrialScoreSet::new(t, n).unwrap()
}

fn metric_parity() -> Outcome {
    let start = Instant::now();
    let p = DcfParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut failures = Vec::new();
    for i in 0..500 {
        let s = random_trial_set(&mut rng);
        let (e, _) = eer(&s).unwrap();
        let (c, _) = min_dcf(&s, &p).unwrap();
        if e != brute_eer(s.targets(), s.nontargets()) {
            failures.push(format!("set {i}: EER"));
        }
        if c != brute_min_dcf(s.targets(), s.nontargets(), p.p_target, p.c_miss, p.c_fa) {
            failures.push(format!("set {i}: minDCF"));
        }
        let warped = s.map(f64::tanh).unwrap();
        if eer(&warped).unwrap().0 != e || min_dcf(&warped, &p).unwrap().0 != c {
            failures.push(format!("set {i}: tanh warping"));
        }
    }
    let detail = if failures.is_empty() {
        "500 sets: EER and minDCF equal the exhaustive oracle and survive tanh warping".to_string()
    } else {
        format!("{} violations, first: {}", failures.len(), failures[0])
    };
    timed(20.0, start, failures.is_empty(), detail)
}

// ---------------------------------------------------------------- 8

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_wpekit")).args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn pipeline(root: &Path, corpus: &Path, tag: &str) -> Result<Vec<u8>, String> {
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let sim = root.join(format!("sim-{tag}"));
    let proc = root.join(format!("proc-{tag}"));
    let report = root.join(format!("report-{tag}.jsonl"));
    run_cli(&["simulate", &s(&corpus.join("manifest.jsonl")), "--out-dir", &s(&sim), "--seed", "11"])?;
    let mut inputs: Vec<String> = fs::read_dir(&sim)
        .map_err(|e| e.to_string())?
        .map(|e| s(&e.unwrap().path()))
        .filter(|p| p.ends_with(".observed.wav"))
        .collect();
    inputs.sort();
    let mut args = vec!["dereverb".to_string(), "--mode".into(), "wpe_iterative".into(), "--out-dir".into(), s(&proc)];
    args.extend(inputs);
    run_cli(&args.iter().map(String::as_str).collect::<Vec<_>>())?;
    run_cli(&["evaluate", "--references", &s(&sim), "--processed", &s(&proc), "--out", &s(&report)])?;
    fs::read(&report).map_err(|e| e.to_string())
}

fn determinism() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let corpus = dir.path().join("corpus");
    let corpus_s = corpus.to_str().unwrap();
    let result = run_cli(&["generate", "--out-dir", corpus_s, "--count", "3", "--duration", "3", "--seed", "8"])
        .and_then(|_| Ok((pipeline(dir.path(), &corpus, "a")?, pipeline(dir.path(), &corpus, "b")?)));
    match result {
        Ok((a, b)) => {
            let lines = a.iter().filter(|&&c| c == b'\n').count();
            outcome(a == b && lines == 5, format!("two simulate, dereverb, evaluate runs: {} bytes each, identical: {}", a.len(), a == b))
        }
        Err(e) => outcome(false, e),
    }
}

// ---------------------------------------------------------------- 9

fn scale_equivariance() -> Outcome {
    let cfg = StftConfig::dereverb();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let u = utterance(&mut rng, 2, 2.0);
    let y = stft(&u.obs.observed.select(0), &cfg).unwrap();
    let second = stft(&u.obs.observed.select(1), &cfg).unwrap();
    let early = stft(&u.obs.early_clean.select(0), &cfg).unwrap();
    let oracle = estimate_psd(&early, PsdMode::Oracle, None, 1e-10).unwrap();
    let ext = PsdEstimate::from_lps(&oracle.values().mapv(f64::ln)).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let alpha = Complex64::from_polar(rng.gen_range(0.01..100.0), rng.gen_range(0.0..std::f64::consts::TAU));
        let ext_a = ext.scaled(alpha.norm_sqr());
        let (ya, sa, ea) = (y.scaled(alpha), second.scaled(alpha), early.scaled(alpha));
        for mode in [PsdMode::Observed, PsdMode::Iterative, PsdMode::Oracle, PsdMode::External] {
            let single = WpeConfig::single().with_mode(mode);
            let base = dereverberate(&y, &single, Some(&early), Some(&ext)).unwrap();
            let scaled = dereverberate(&ya, &single, Some(&ea), Some(&ext_a)).unwrap();
            worst = worst.max(rel_err_c(scaled.data().iter().copied(), base.scaled(alpha).data().iter().copied()));

            let vace = WpeConfig::vace().with_mode(mode);
            let base = vace_dereverberate(&y, &second, &vace, Some(&early), Some(&ext)).unwrap();
            let scaled = vace_dereverberate(&ya, &sa, &vace, Some(&ea), Some(&ext_a)).unwrap();
            worst = worst.max(rel_err_c(scaled.data().iter().copied(), base.scaled(alpha).data().iter().copied()));
        }
    }
    outcome(
        worst <= 1e-10,
        format!("max relative deviation {worst:.2e} over 20 scalars, 4 PSD modes, single and dual channel (bound 1e-10)"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("stft fidelity", stft_fidelity),
        ("wpe oracle equivalence", wpe_oracle_equivalence),
        ("passthrough regime", passthrough),
        ("dereverberation efficacy", efficacy),
        ("dual-channel gain", dual_channel_gain),
        ("loss identities", loss_identities),
        ("metric oracle parity", metric_parity),
        ("determinism", determinism),
        ("scale equivariance", scale_equivariance),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut passed = 0;
    let mut ran = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|o| o != n) {
            continue;
        }
        ran += 1;
        let result = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        passed += result.pass as usize;
        println!("criterion {n} ({name}): {}  {}", if result.pass { "PASS" } else { "FAIL" }, result.detail);
    }
    println!("acceptance: {passed}/{ran} criteria passed");
    if passed != ran {
        std::process::exit(1);
    }
}
