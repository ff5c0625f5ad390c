use std::f64::consts::PI;

use ndarray::{s, Array3, Axis};
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::TimeSignal;
use crate::{Error, Result};

/// Analysis window shape. All windows are periodic (DFT-even), so
/// `w[n] == w[len - n]` for `0 < n < len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    SqrtHann,
    Hann,
    Rectangular,
}

impl Window {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        (0..len)
            .map(|n| {
                let hann = 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos();
                match self {
                    Window::SqrtHann => hann.sqrt(),
                    Window::Hann => hann,
                    Window::Rectangular => 1.0,
                }
            })
            .collect()
    }
}

/// STFT analysis parameters, in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftConfig {
    pub frame_len: usize,
    pub hop_len: usize,
    pub fft_len: usize,
    pub window: Window,
    pub center_pad: bool,
}

/// Reconstruction tolerance on the normalised overlap-add sum.
const COLA_TOLERANCE: f64 = 1e-6;

impl StftConfig {
    pub fn new(
        frame_len: usize,
        hop_len: usize,
        fft_len: usize,
        window: Window,
        center_pad: bool,
    ) -> Result<Self> {
        let cfg = Self {
            frame_len,
            hop_len,
            fft_len,
            window,
            center_pad,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// 64 ms frames, 16 ms hop, 1024-point FFT: the dereverberation front-end.
    pub fn dereverb() -> Self {
        Self {
            frame_len: 1024,
            hop_len: 256,
            fft_len: 1024,
            window: Window::SqrtHann,
            center_pad: true,
        }
    }

    /// 25 ms frames, 10 ms hop, 512-point FFT: the speaker-embedding front-end.
    pub fn features() -> Self {
        Self {
            frame_len: 400,
            hop_len: 160,
            fft_len: 512,
            window: Window::SqrtHann,
            center_pad: true,
        }
    }

    pub fn num_bins(&self) -> usize {
        self.fft_len / 2 + 1
    }

    fn pad(&self) -> usize {
        if self.center_pad {
            self.frame_len / 2
        } else {
            0
        }
    }

    /// Frames produced for a signal of `signal_len` samples.
    pub fn num_frames(&self, signal_len: usize) -> usize {
        let padded = signal_len + 2 * self.pad();
        if padded >= self.frame_len {
            1 + (padded - self.frame_len) / self.hop_len
        } else {
            1
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame_len == 0 || self.hop_len == 0 {
            return Err(Error::config("frame and hop lengths must be positive"));
        }
        if self.hop_len > self.frame_len {
            return Err(Error::config(format!(
                "hop {} exceeds frame length {}",
                self.hop_len, self.frame_len
            )));
        }
        if !self.fft_len.is_power_of_two() || self.fft_len < self.frame_len {
            return Err(Error::config(format!(
                "fft length {} must be a power of two no smaller than the frame ({})",
                self.fft_len, self.frame_len
            )));
        }
        let deviation = self.cola_deviation();
        if !(deviation <= COLA_TOLERANCE) {
            return Err(Error::config(format!(
                "{:?} window with frame {} and hop {} cannot be overlap-added back (deviation {deviation:e})",
                self.window, self.frame_len, self.hop_len
            )));
        }
        Ok(())
    }

    /// Steady-state sum of squared analysis windows at each offset within a hop.
    fn overlap_envelope(&self) -> Vec<f64> {
        let w = self.window.coefficients(self.frame_len);
        (0..self.hop_len)
            .map(|n| {
                (n..self.frame_len)
                    .step_by(self.hop_len)
                    .map(|i| w[i] * w[i])
                    .sum()
            })
            .collect()
    }

    /// Relative spread of the raw squared-window overlap-add. Zero for
    /// pairs such as sqrt-Hann at a quarter-frame hop.
    pub fn raw_cola_deviation(&self) -> f64 {
        let env = self.overlap_envelope();
        let max = env.iter().cloned().fold(0.0, f64::max);
        let min = env.iter().cloned().fold(f64::INFINITY, f64::min);
        (max - min) / max
    }

    /// Worst deviation from one of `sum_k w_a * w_s` once the synthesis
    /// window is normalised by the overlap envelope. Infinite when the
    /// envelope vanishes somewhere, i.e. some samples are never observed.
    pub fn cola_deviation(&self) -> f64 {
        let env = self.overlap_envelope();
        let max = env.iter().cloned().fold(0.0, f64::max);
        if env.iter().any(|&e| !(e > 1e-6 * max)) {
            return f64::INFINITY;
        }
        let w = self.window.coefficients(self.frame_len);
        (0..self.hop_len)
            .map(|n| {
                let total: f64 = (n..self.frame_len)
                    .step_by(self.hop_len)
                    .map(|i| w[i] * (w[i] / env[n]))
                    .sum();
                (total - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// One-sided complex STFT, indexed `(channel, frame, bin)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    data: Array3<Complex64>,
    config: StftConfig,
    sample_rate: u32,
    signal_len: usize,
}

impl Spectrogram {
    /// Wrap raw coefficients. Bin and frame counts must agree with `config`
    /// and the length of the signal they describe.
    pub fn from_parts(
        data: Array3<Complex64>,
        config: StftConfig,
        sample_rate: u32,
        signal_len: usize,
    ) -> Result<Self> {
        config.validate()?;
        let (c, t, f) = data.dim();
        if c == 0 {
            return Err(Error::shape("spectrogram needs at least one channel"));
        }
        if f != config.num_bins() {
            return Err(Error::shape(format!(
                "{f} bins given, fft length {} implies {}",
                config.fft_len,
                config.num_bins()
            )));
        }
        if t != config.num_frames(signal_len) {
            return Err(Error::shape(format!(
                "{t} frames given, a {signal_len}-sample signal implies {}",
                config.num_frames(signal_len)
            )));
        }
        Ok(Self {
            data,
            config,
            sample_rate,
            signal_len,
        })
    }

    /// Same analysis metadata, new coefficients of identical shape.
    pub fn with_data(&self, data: Array3<Complex64>) -> Result<Self> {
        if data.dim().1 != self.num_frames() || data.dim().2 != self.num_bins() {
            return Err(Error::shape(format!(
                "replacement coefficients have shape {:?}, expected (_, {}, {})",
                data.dim(),
                self.num_frames(),
                self.num_bins()
            )));
        }
        Ok(Self {
            data,
            config: self.config,
            sample_rate: self.sample_rate,
            signal_len: self.signal_len,
        })
    }

    pub fn data(&self) -> &Array3<Complex64> {
        &self.data
    }

    pub fn into_data(self) -> Array3<Complex64> {
        self.data
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn signal_len(&self) -> usize {
        self.signal_len
    }

    pub fn num_channels(&self) -> usize {
        self.data.dim().0
    }

    pub fn num_frames(&self) -> usize {
        self.data.dim().1
    }

    pub fn num_bins(&self) -> usize {
        self.data.dim().2
    }

    pub fn channel(&self, index: usize) -> Spectrogram {
        let data = self.data.slice(s![index..index + 1, .., ..]).to_owned();
        Spectrogram { data, ..*self }
    }

    pub fn scaled(&self, alpha: Complex64) -> Spectrogram {
        Spectrogram {
            data: self.data.mapv(|z| alpha * z),
            ..*self
        }
    }

    /// `|X|^2` per coefficient.
    pub fn power(&self) -> Array3<f64> {
        self.data.mapv(|z| z.norm_sqr())
    }

    /// Stack the channels of several spectrograms sharing one analysis.
    pub fn stack(parts: &[&Spectrogram]) -> Result<Spectrogram> {
        let Some(first) = parts.first() else {
            return Err(Error::config("nothing to stack"));
        };
        for p in parts {
            first.check_same_grid(p)?;
        }
        let views: Vec<_> = parts.iter().map(|p| p.data.view()).collect();
        let data = ndarray::concatenate(Axis(0), &views)
            .map_err(|e| Error::shape(e.to_string()))?;
        Ok(Spectrogram { data, ..**first })
    }

    /// Same analysis, frame and bin grid (channel counts may differ).
    pub fn check_same_grid(&self, other: &Spectrogram) -> Result<()> {
        if self.config != other.config
            || self.num_frames() != other.num_frames()
            || self.num_bins() != other.num_bins()
            || self.sample_rate != other.sample_rate
        {
            return Err(Error::shape(format!(
                "spectrogram grids differ: {:?} vs {:?}",
                self.data.dim(),
                other.data.dim()
            )));
        }
        Ok(())
    }

    pub fn check_same_shape(&self, other: &Spectrogram) -> Result<()> {
        self.check_same_grid(other)?;
        if self.num_channels() != other.num_channels() {
            return Err(Error::shape(format!(
                "channel counts differ: {} vs {}",
                self.num_channels(),
                other.num_channels()
            )));
        }
        Ok(())
    }

    /// Energy of the windowed time frame, recovered from the one-sided
    /// spectrum through Parseval's relation.
    pub fn frame_energy(&self, channel: usize, frame: usize) -> f64 {
        let n = self.config.fft_len;
        let row = self.data.slice(s![channel, frame, ..]);
        let last = row.len() - 1;
        let inner: f64 = row.iter().enumerate().map(|(k, z)| {
            let weight = if k == 0 || k == last { 1.0 } else { 2.0 };
            weight * z.norm_sqr()
        }).sum();
        inner / n as f64
    }
}

/// Index into the signal after symmetric reflection about its end points.
fn reflect(index: isize, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * (len as isize - 1);
    let m = index.rem_euclid(period);
    if m >= len as isize {
        (period - m) as usize
    } else {
        m as usize
    }
}

/// Forward STFT of every channel of `signal`.
pub fn stft(signal: &TimeSignal, config: &StftConfig) -> Result<Spectrogram> {
    config.validate()?;
    signal.require_workbench_rate()?;
    if signal.is_empty() {
        return Err(Error::Precondition("STFT of an empty signal".into()));
    }
    let len = signal.len();
    let frames = config.num_frames(len);
    let bins = config.num_bins();
    let pad = config.pad() as isize;
    let window = config.window.coefficients(config.frame_len);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(config.fft_len);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut buf = vec![Complex64::default(); config.fft_len];
    let mut data = Array3::<Complex64>::zeros((signal.num_channels(), frames, bins));

    for (c, x) in signal.channels().iter().enumerate() {
        for t in 0..frames {
            buf.fill(Complex64::default());
            let start = (t * config.hop_len) as isize - pad;
            for (n, (slot, w)) in buf.iter_mut().zip(&window).enumerate() {
                let i = start + n as isize;
                let sample = if config.center_pad {
                    x[reflect(i, len)]
                } else if (i as usize) < len {
                    x[i as usize]
                } else {
                    0.0
                };
                *slot = Complex64::new(w * sample, 0.0);
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for (k, z) in buf[..bins].iter().enumerate() {
                data[[c, t, k]] = *z;
            }
        }
    }
    Spectrogram::from_parts(data, *config, signal.sample_rate(), len)
}

/// Inverse STFT by weighted overlap-add. The synthesis window equals the
/// analysis window, and the result is divided by the overlap-added squared
/// window, which makes `istft(stft(x)) == x` for every valid configuration.
pub fn istft(spec: &Spectrogram) -> Result<TimeSignal> {
    let config = spec.config;
    let n = config.fft_len;
    let pad = config.pad();
    let window = config.window.coefficients(config.frame_len);
    let frames = spec.num_frames();
    let out_len = (frames - 1) * config.hop_len + config.frame_len;
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let mut scratch = vec![Complex64::default(); ifft.get_inplace_scratch_len()];
    let mut buf = vec![Complex64::default(); n];

    let mut envelope = vec![0.0; out_len];
    for t in 0..frames {
        for (i, w) in window.iter().enumerate() {
            envelope[t * config.hop_len + i] += w * w;
        }
    }
    let env_max = envelope.iter().cloned().fold(0.0, f64::max);

    let mut channels = Vec::with_capacity(spec.num_channels());
    for c in 0..spec.num_channels() {
        let mut acc = vec![0.0; out_len];
        for t in 0..frames {
            let row = spec.data.slice(s![c, t, ..]);
            buf[0] = Complex64::new(row[0].re, 0.0);
            for k in 1..n / 2 {
                buf[k] = row[k];
                buf[n - k] = row[k].conj();
            }
            buf[n / 2] = Complex64::new(row[n / 2].re, 0.0);
            ifft.process_with_scratch(&mut buf, &mut scratch);
            let start = t * config.hop_len;
            for (i, w) in window.iter().enumerate() {
                acc[start + i] += w * buf[i].re / n as f64;
            }
        }
        let samples = (0..spec.signal_len)
            .map(|i| {
                let j = i + pad;
                match envelope.get(j) {
                    Some(&e) if e > 1e-12 * env_max => acc[j] / e,
                    _ => 0.0,
                }
            })
            .collect();
        channels.push(samples);
    }
    TimeSignal::new(channels, spec.sample_rate)
}

impl Default for StftConfig {
    fn default() -> Self {
        Self::dereverb()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::SAMPLE_RATE;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(len: usize, seed: u64) -> TimeSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        TimeSignal::mono((0..len).map(|_| rng.gen_range(-1.0..1.0)).collect(), SAMPLE_RATE).unwrap()
    }

    fn rel_err(a: &TimeSignal, b: &TimeSignal) -> f64 {
        crate::signal::relative_l2(a, b).unwrap()
    }

    #[test]
    fn default_configs_are_valid() {
        StftConfig::dereverb().validate().unwrap();
        StftConfig::features().validate().unwrap();
        assert_eq!(StftConfig::dereverb().num_bins(), 513);
        assert_eq!(StftConfig::features().num_bins(), 257);
        // sqrt-Hann at a quarter hop overlap-adds exactly even before normalisation
        assert!(StftConfig::dereverb().raw_cola_deviation() < 1e-12);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(StftConfig::new(512, 600, 512, Window::Hann, true).is_err());
        assert!(StftConfig::new(400, 160, 400, Window::Hann, true).is_err());
        assert!(StftConfig::new(512, 128, 256, Window::Hann, true).is_err());
        // a Hann window hopped by its full length never observes sample 0 of each hop
        assert!(StftConfig::new(512, 512, 512, Window::Hann, false).is_err());
        assert!(StftConfig::new(512, 512, 512, Window::Rectangular, false).is_ok());
    }

    #[test]
    fn zero_signal_gives_zero_spectrogram_and_back() {
        let x = TimeSignal::mono(vec![0.0; 5000], SAMPLE_RATE).unwrap();
        let spec = stft(&x, &StftConfig::dereverb()).unwrap();
        assert!(spec.data().iter().all(|z| z.norm() == 0.0));
        let y = istft(&spec).unwrap();
        assert!(y.channel(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_signal_is_a_precondition_error() {
        let x = TimeSignal::mono(vec![], SAMPLE_RATE).unwrap();
        assert!(matches!(stft(&x, &StftConfig::dereverb()), Err(Error::Precondition(_))));
    }

    #[test]
    fn frame_count_follows_hop() {
        let cfg = StftConfig::dereverb();
        assert_eq!(cfg.num_frames(16_000), 1 + 16_000 / 256);
        let x = noise(16_000, 1);
        assert_eq!(stft(&x, &cfg).unwrap().num_frames(), 63);
    }

    #[test]
    fn bin_centred_sinusoid_is_concentrated() {
        let n = 512;
        let cfg = StftConfig::new(n, n, n, Window::Rectangular, false).unwrap();
        let k0 = 37;
        let x: Vec<f64> = (0..n)
            .map(|i| (2.0 * PI * k0 as f64 * i as f64 / n as f64).cos())
            .collect();
        let spec = stft(&TimeSignal::mono(x, SAMPLE_RATE).unwrap(), &cfg).unwrap();
        assert_eq!(spec.num_frames(), 1);
        let mags: Vec<f64> = spec.data().iter().map(|z| z.norm()).collect();
        let peak = mags[k0];
        assert!((peak - n as f64 / 2.0).abs() < 1e-9);
        for (k, m) in mags.iter().enumerate() {
            if k != k0 {
                assert!(*m <= 1e-10 * peak, "bin {k} has {m}");
            }
        }
    }

    #[test]
    fn impulse_at_frame_centre_has_flat_magnitude() {
        let cfg = StftConfig::dereverb();
        let mut x = vec![0.0; 4096];
        let frame = 5;
        x[frame * cfg.hop_len] = 1.0;
        let spec = stft(&TimeSignal::mono(x, SAMPLE_RATE).unwrap(), &cfg).unwrap();
        let centre_value = cfg.window.coefficients(cfg.frame_len)[cfg.frame_len / 2];
        for k in 0..spec.num_bins() {
            let m = spec.data()[[0, frame, k]].norm();
            assert!((m - centre_value).abs() < 1e-12, "bin {k}: {m}");
        }
    }

    #[test]
    fn round_trip_white_noise_dereverb_config() {
        let x = noise(16_000, 3);
        let y = istft(&stft(&x, &StftConfig::dereverb()).unwrap()).unwrap();
        assert!(rel_err(&y, &x) <= 1e-6);
    }

    #[test]
    fn round_trip_feature_config_and_edges() {
        // Coloured noise: first-order recursive low-pass of white noise.
        let w = noise(23_457, 4);
        let mut prev = 0.0;
        let coloured: Vec<f64> = w.channel(0).iter().map(|v| { prev = 0.95 * prev + v; prev }).collect();
        let x = TimeSignal::mono(coloured, SAMPLE_RATE).unwrap();
        let y = istft(&stft(&x, &StftConfig::features()).unwrap()).unwrap();
        assert!(rel_err(&y, &x) <= 1e-6);
        let worst = x.channel(0).iter().zip(y.channel(0)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-9);
    }

    #[test]
    fn short_signals_survive_round_trip() {
        for len in [1usize, 2, 3, 100, 511] {
            let x = noise(len, len as u64);
            let y = istft(&stft(&x, &StftConfig::dereverb()).unwrap()).unwrap();
            assert_eq!(y.len(), len);
            assert!(rel_err(&y, &x) <= 1e-6, "len {len}");
        }
    }

    #[test]
    fn parseval_per_frame() {
        let cfg = StftConfig::features();
        let x = noise(8000, 5);
        let spec = stft(&x, &cfg).unwrap();
        let w = cfg.window.coefficients(cfg.frame_len);
        let pad = cfg.frame_len / 2;
        for t in [0usize, 7, 20, spec.num_frames() - 1] {
            let direct: f64 = (0..cfg.frame_len)
                .map(|n| {
                    let i = (t * cfg.hop_len + n) as isize - pad as isize;
                    let v = w[n] * x.channel(0)[reflect(i, x.len())];
                    v * v
                })
                .sum();
            let spectral = spec.frame_energy(0, t);
            assert!((direct - spectral).abs() <= 1e-8 * direct, "frame {t}");
        }
    }

    #[test]
    fn reflection_indexing() {
        assert_eq!(reflect(-1, 5), 1);
        assert_eq!(reflect(-4, 5), 4);
        assert_eq!(reflect(5, 5), 3);
        assert_eq!(reflect(-6, 5), 2);
        assert_eq!(reflect(12, 5), 4);
        assert_eq!(reflect(-3, 1), 0);
    }

    #[test]
    fn multichannel_is_per_channel() {
        let a = noise(3000, 8);
        let b = noise(3000, 9);
        let ab = TimeSignal::stack(&[&a, &b]).unwrap();
        let cfg = StftConfig::dereverb();
        let s = stft(&ab, &cfg).unwrap();
        assert_eq!(s.channel(1), stft(&b, &cfg).unwrap());
    }
}
