use std::io::Write;

use flate2::write::DeflateEncoder;
use flate2::Compression;

use crate::error::{Error, Result};
use crate::model::{canonical_parts, check_parts, SeriesSet};
use crate::quantizer::QuantizerSpec;

/// A deterministic map from a byte sequence to its compressed length.
pub trait Compressor: Send + Sync {
    fn name(&self) -> &str;
    fn compressed_len(&self, data: &[u8]) -> Result<usize>;
}

/// Raw deflate at the best compression setting.
#[derive(Debug, Clone, Copy, Default)]
pub struct Deflate;

impl Compressor for Deflate {
    fn name(&self) -> &str {
        "deflate"
    }

    fn compressed_len(&self, data: &[u8]) -> Result<usize> {
        let mut enc = DeflateEncoder::new(Vec::new(), Compression::best());
        enc.write_all(data)
            .map_err(|e| Error::Compressor(format!("deflate: {e}")))?;
        let out = enc
            .finish()
            .map_err(|e| Error::Compressor(format!("deflate: {e}")))?;
        Ok(out.len())
    }
}

/// LZMA through liblzma (legacy `.lzma` container, preset 6).
#[derive(Debug, Clone, Copy, Default)]
pub struct Lzma;

impl Compressor for Lzma {
    fn name(&self) -> &str {
        "lzma"
    }

    fn compressed_len(&self, data: &[u8]) -> Result<usize> {
        let options = xz2::stream::LzmaOptions::new_preset(6)
            .map_err(|e| Error::Compressor(format!("lzma: {e}")))?;
        let stream = xz2::stream::Stream::new_lzma_encoder(&options)
            .map_err(|e| Error::Compressor(format!("lzma: {e}")))?;
        let mut encoder = xz2::write::XzEncoder::new_stream(Vec::new(), stream);
        encoder
            .write_all(data)
            .map_err(|e| Error::Compressor(format!("lzma: {e}")))?;
        let out = encoder
            .finish()
            .map_err(|e| Error::Compressor(format!("lzma: {e}")))?;
        Ok(out.len())
    }
}

/// Looks up a backend by name (`deflate` or `lzma`).
pub fn compressor_by_name(name: &str) -> Result<Box<dyn Compressor>> {
    match name.to_ascii_lowercase().as_str() {
        "deflate" => Ok(Box::new(Deflate)),
        "lzma" => Ok(Box::new(Lzma)),
        other => Err(Error::validation(format!(
            "unknown compressor '{other}' (expected deflate or lzma)"
        ))),
    }
}

/// Largest supported quantization level for the compressed streams.
pub const MAX_COMPRESSION_LEVEL: usize = 8;

/// Compression estimate of the mutual information rate of the parts, in bits:
/// `8 * (sum_i |C(part_i)| - |C(joint)|)`.
///
/// Each series is quantized to its level-`level` cells. A part is serialized
/// time step by time step with its series in ascending order, each cell
/// packed into `level` bits, most significant first; the joint interleaves
/// all series of all parts the same way.
/// The result is not clamped and may be negative.
pub fn compression_sum_rate(
    s: &SeriesSet,
    parts: &[Vec<usize>],
    compressor: &dyn Compressor,
    level: usize,
    q: &QuantizerSpec,
) -> Result<f64> {
    if level == 0 || level > MAX_COMPRESSION_LEVEL {
        return Err(Error::validation(format!(
            "compression level must be in 1..={MAX_COMPRESSION_LEVEL}"
        )));
    }
    check_parts(parts, s.count())?;
    let parts = canonical_parts(parts);
    if parts.is_empty() {
        return Err(Error::validation("compression estimate of no parts"));
    }
    if parts.len() == 1 {
        return Ok(0.0);
    }
    let mut union: Vec<usize> = parts.iter().flatten().copied().collect();
    union.sort_unstable();
    let cells: Vec<Vec<u8>> = (0..s.count())
        .map(|i| {
            if union.contains(&i) {
                q.series_digits(s, i)
                    .into_iter()
                    .map(|d| (d >> (32 - level)) as u8)
                    .collect()
            } else {
                Vec::new()
            }
        })
        .collect();
    let serialize = |members: &[usize]| -> Vec<u8> {
        let mut out = Vec::with_capacity((members.len() * s.len() * level).div_ceil(8));
        let mut acc: u32 = 0;
        let mut filled = 0;
        for t in 0..s.len() {
            for &i in members {
                acc = (acc << level) | cells[i][t] as u32;
                filled += level;
                while filled >= 8 {
                    filled -= 8;
                    out.push((acc >> filled) as u8);
                }
                acc &= (1 << filled) - 1;
            }
        }
        if filled > 0 {
            out.push((acc << (8 - filled)) as u8);
        }
        out
    };
    let mut total: i64 = 0;
    for part in &parts {
        total += compressor.compressed_len(&serialize(part))? as i64;
    }
    total -= compressor.compressed_len(&serialize(&union))? as i64;
    Ok(8.0 * total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantizer::fit_normalizer;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bits(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 }).collect()
    }

    #[test]
    fn single_part_is_zero() {
        let s = SeriesSet::from_series(vec![bits(1, 100), bits(2, 100)]).unwrap();
        let q = fit_normalizer(&s);
        assert_eq!(compression_sum_rate(&s, &[vec![0, 1]], &Deflate, 1, &q).unwrap(), 0.0);
    }

    #[test]
    fn copies_compress_jointly() {
        let x = bits(3, 10_000);
        let s = SeriesSet::from_series(vec![x.clone(), x]).unwrap();
        let q = fit_normalizer(&s);
        for c in [&Deflate as &dyn Compressor, &Lzma] {
            let v = compression_sum_rate(&s, &[vec![0], vec![1]], c, 1, &q).unwrap();
            assert!(v > 0.0, "{}: {v}", c.name());
        }
    }

    #[test]
    fn independent_bits_are_near_zero() {
        let n = 10_000;
        let s = SeriesSet::from_series(vec![bits(4, n), bits(5, n)]).unwrap();
        let q = fit_normalizer(&s);
        for c in [&Deflate as &dyn Compressor, &Lzma] {
            let v = compression_sum_rate(&s, &[vec![0], vec![1]], c, 1, &q).unwrap();
            assert!(v.abs() <= 0.05 * n as f64, "{}: {v}", c.name());
        }
    }

    #[test]
    fn backend_lookup() {
        assert_eq!(compressor_by_name("LZMA").unwrap().name(), "lzma");
        assert_eq!(compressor_by_name("deflate").unwrap().name(), "deflate");
        assert!(compressor_by_name("zstd").is_err());
        let s = SeriesSet::from_series(vec![bits(1, 10), bits(2, 10)]).unwrap();
        let q = fit_normalizer(&s);
        assert!(compression_sum_rate(&s, &[vec![0], vec![1]], &Deflate, 9, &q).is_err());
    }
}
