use std::io::{Read, Seek, Write};
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::TimeSignal;
use crate::{Error, Result};

/// Sample encoding used by [`save_wav`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Pcm16,
    Float32,
}

const PCM16_SCALE: f64 = 32768.0;

fn map_hound(err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) => Error::Io(e),
        other => Error::format(other.to_string()),
    }
}

/// Load a PCM16 or float32 WAV file. Amplitudes land in [-1, 1]; PCM16 is
/// scaled by 1/32768.
pub fn load_wav(path: impl AsRef<Path>) -> Result<TimeSignal> {
    let reader = WavReader::open(path.as_ref()).map_err(map_hound)?;
    read_wav(reader)
}

pub(crate) fn read_wav<R: Read>(reader: WavReader<R>) -> Result<TimeSignal> {
    let spec = reader.spec();
    let num_channels = spec.channels as usize;
    if num_channels == 0 {
        return Err(Error::format("WAV header declares zero channels"));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f64 / PCM16_SCALE))
            .collect::<std::result::Result<_, _>>()
            .map_err(map_hound)?,
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<std::result::Result<_, _>>()
            .map_err(map_hound)?,
        (fmt, bits) => {
            return Err(Error::format(format!(
                "unsupported sample encoding {fmt:?} with {bits} bits; expected PCM16 or float32"
            )))
        }
    };
    if interleaved.len() % num_channels != 0 {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::UnexpectedEof,
            "sample data ends mid-frame",
        )));
    }
    let frames = interleaved.len() / num_channels;
    let mut channels = vec![Vec::with_capacity(frames); num_channels];
    for frame in interleaved.chunks_exact(num_channels) {
        for (c, &v) in frame.iter().enumerate() {
            channels[c].push(v);
        }
    }
    TimeSignal::new(channels, spec.sample_rate)
}

/// Write `signal` as a RIFF WAV file. PCM16 samples are rounded and clipped
/// to the 16-bit range; float32 stores the `f32` cast of each sample.
pub fn save_wav(signal: &TimeSignal, path: impl AsRef<Path>, bit_depth: BitDepth) -> Result<()> {
    if signal.is_empty() {
        return Err(Error::Precondition("cannot write an empty signal".into()));
    }
    let file = std::fs::File::create(path.as_ref())?;
    write_wav(signal, std::io::BufWriter::new(file), bit_depth)
}

pub(crate) fn write_wav<W: Write + Seek>(
    signal: &TimeSignal,
    sink: W,
    bit_depth: BitDepth,
) -> Result<()> {
    let spec = WavSpec {
        channels: signal.num_channels() as u16,
        sample_rate: signal.sample_rate(),
        bits_per_sample: match bit_depth {
            BitDepth::Pcm16 => 16,
            BitDepth::Float32 => 32,
        },
        sample_format: match bit_depth {
            BitDepth::Pcm16 => SampleFormat::Int,
            BitDepth::Float32 => SampleFormat::Float,
        },
    };
    let mut writer = WavWriter::new(sink, spec).map_err(map_hound)?;
    for i in 0..signal.len() {
        for c in 0..signal.num_channels() {
            let x = signal.channel(c)[i];
            match bit_depth {
                BitDepth::Pcm16 => {
                    let q = (x * PCM16_SCALE).round().clamp(-32768.0, 32767.0) as i16;
                    writer.write_sample(q).map_err(map_hound)?;
                }
                BitDepth::Float32 => writer.write_sample(x as f32).map_err(map_hound)?,
            }
        }
    }
    writer.finalize().map_err(map_hound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::SAMPLE_RATE;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_signal(len: usize, channels: usize, seed: u64) -> TimeSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chans = (0..channels)
            .map(|_| (0..len).map(|_| rng.gen_range(-1.0f32..1.0) as f64).collect())
            .collect();
        TimeSignal::new(chans, SAMPLE_RATE).unwrap()
    }

    #[test]
    fn zero_pcm16_file_loads_as_zeros() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zeros.wav");
        let spec = WavSpec {
            channels: 1,
            sample_rate: 16_000,
            bits_per_sample: 16,
            sample_format: SampleFormat::Int,
        };
        let mut w = WavWriter::create(&path, spec).unwrap();
        for _ in 0..16_000 {
            w.write_sample(0i16).unwrap();
        }
        w.finalize().unwrap();
        let s = load_wav(&path).unwrap();
        assert_eq!(s.len(), 16_000);
        assert_eq!(s.sample_rate(), 16_000);
        assert!(s.channel(0).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn pcm16_full_scale_maps_to_fixed_point_fraction() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("max.wav");
        let spec = WavSpec {
            channels: 1,
            sample_rate: 16_000,
            bits_per_sample: 16,
            sample_format: SampleFormat::Int,
        };
        let mut w = WavWriter::create(&path, spec).unwrap();
        w.write_sample(32767i16).unwrap();
        w.write_sample(-32768i16).unwrap();
        w.finalize().unwrap();
        let s = load_wav(&path).unwrap();
        assert_eq!(s.channel(0), &[32767.0 / 32768.0, -1.0]);
    }

    #[test]
    fn mu_law_is_a_format_error() {
        // Minimal RIFF header with format tag 7 (mu-law), 8 bits.
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"RIFF");
        bytes.extend_from_slice(&(36u32 + 4).to_le_bytes());
        bytes.extend_from_slice(b"WAVEfmt ");
        bytes.extend_from_slice(&16u32.to_le_bytes());
        bytes.extend_from_slice(&7u16.to_le_bytes());
        bytes.extend_from_slice(&1u16.to_le_bytes());
        bytes.extend_from_slice(&8000u32.to_le_bytes());
        bytes.extend_from_slice(&8000u32.to_le_bytes());
        bytes.extend_from_slice(&1u16.to_le_bytes());
        bytes.extend_from_slice(&8u16.to_le_bytes());
        bytes.extend_from_slice(b"data");
        bytes.extend_from_slice(&4u32.to_le_bytes());
        bytes.extend_from_slice(&[0xff, 0x7f, 0x00, 0x80]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ulaw.wav");
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(load_wav(&path), Err(Error::Format(_))));
    }

    #[test]
    fn eight_bit_pcm_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u8.wav");
        let spec = WavSpec {
            channels: 1,
            sample_rate: 16_000,
            bits_per_sample: 8,
            sample_format: SampleFormat::Int,
        };
        let mut w = WavWriter::create(&path, spec).unwrap();
        w.write_sample(3i8).unwrap();
        w.finalize().unwrap();
        assert!(matches!(load_wav(&path), Err(Error::Format(_))));
    }

    #[test]
    fn truncated_file_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cut.wav");
        save_wav(&random_signal(1000, 1, 1), &path, BitDepth::Pcm16).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 301]).unwrap();
        assert!(matches!(load_wav(&path), Err(Error::Io(_))));
    }

    #[test]
    fn float32_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f32.wav");
        let x = random_signal(4000, 2, 7);
        save_wav(&x, &path, BitDepth::Float32).unwrap();
        let y = load_wav(&path).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn pcm16_round_trip_within_quantization_bound() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("i16.wav");
        let mut x = random_signal(4000, 1, 9).into_channels();
        x[0][0] = 1.0;
        x[0][1] = -1.0;
        let x = TimeSignal::new(x, SAMPLE_RATE).unwrap();
        save_wav(&x, &path, BitDepth::Pcm16).unwrap();
        let y = load_wav(&path).unwrap();
        let max_err = x
            .channel(0)
            .iter()
            .zip(y.channel(0))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max_err <= 2f64.powi(-15), "max error {max_err}");
    }

    #[test]
    fn empty_signal_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let empty = TimeSignal::mono(vec![], SAMPLE_RATE).unwrap();
        let err = save_wav(&empty, dir.path().join("e.wav"), BitDepth::Float32).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn unwritable_path_is_an_io_error() {
        let x = random_signal(10, 1, 3);
        let err = save_wav(&x, "/nonexistent-dir/x.wav", BitDepth::Pcm16).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }
}
