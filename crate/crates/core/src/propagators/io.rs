//! Trajectory output: CSV tables and raw spectral snapshots.
//!
//! Snapshot layout (little endian), one record per component per sample:
//! the magic bytes `NRLB`, `u32` version (1), `u32` dim, `u32` n, then
//! `n^dim` pairs `(re, im)` of `f64` spectral coefficients in storage order.
//! Records are concatenated; sample times live in the companion CSV.

use std::io::{Read, Write};

use super::evolve::Trajectory;
use crate::error::{Error, Result};
use crate::grid::{Grid, C64};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"NRLB";
pub const SNAPSHOT_VERSION: u32 = 1;

/// Writes one snapshot record.
pub fn write_snapshot<W: Write>(out: &mut W, grid: &Grid, spec: &[C64]) -> Result<()> {
    if spec.len() != grid.len() {
        return Err(Error::ShapeMismatch {
            expected: grid.len(),
            got: spec.len(),
        });
    }
    out.write_all(SNAPSHOT_MAGIC)?;
    out.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    out.write_all(&(grid.dim() as u32).to_le_bytes())?;
    out.write_all(&(grid.n() as u32).to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * spec.len());
    for z in spec {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

/// A decoded snapshot record.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub dim: u32,
    pub n: u32,
    pub data: Vec<C64>,
}

fn read_u32<R: Read>(inp: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    inp.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Reads every record until end of input.
pub fn read_snapshots<R: Read>(inp: &mut R) -> Result<Vec<Snapshot>> {
    let mut bytes = Vec::new();
    inp.read_to_end(&mut bytes)?;
    let mut cur = std::io::Cursor::new(bytes.as_slice());
    let mut out = Vec::new();
    while (cur.position() as usize) < bytes.len() {
        let mut magic = [0u8; 4];
        cur.read_exact(&mut magic)
            .map_err(|_| Error::Snapshot("truncated header".into()))?;
        if &magic != SNAPSHOT_MAGIC {
            return Err(Error::Snapshot("bad magic".into()));
        }
        let version = read_u32(&mut cur)?;
        if version != SNAPSHOT_VERSION {
            return Err(Error::Snapshot(format!("unsupported version {version}")));
        }
        let dim = read_u32(&mut cur)?;
        let n = read_u32(&mut cur)?;
        if !(1..=3).contains(&dim) {
            return Err(Error::Snapshot(format!("bad dimension {dim}")));
        }
        let len = (n as usize).pow(dim);
        let mut data = Vec::with_capacity(len);
        let mut b = [0u8; 16];
        for _ in 0..len {
            cur.read_exact(&mut b)
                .map_err(|_| Error::Snapshot("truncated payload".into()))?;
            let re = f64::from_le_bytes(b[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(b[8..].try_into().expect("8 bytes"));
            data.push(C64::new(re, im));
        }
        out.push(Snapshot { dim, n, data });
    }
    Ok(out)
}

/// Writes every sample of a trajectory as snapshot records.
pub fn write_trajectory_snapshots<W: Write>(out: &mut W, traj: &Trajectory) -> Result<()> {
    for s in &traj.states {
        for c in &s.comps {
            write_snapshot(out, &traj.grid, c)?;
        }
    }
    Ok(())
}

/// CSV with columns `t`, `Re/Im` of the selected modes of each component,
/// `mass`, `norm_h1`, `hamiltonian`.
pub fn write_trajectory_csv<W: Write>(out: W, traj: &Trajectory, modes: &[Vec<i64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let ncomp = traj.states.first().map_or(1, |s| s.comps.len());
    let mut header = vec!["t".to_string()];
    let mut idx = Vec::new();
    for comp in 0..ncomp {
        for m in modes {
            let label = m
                .iter()
                .map(|k| k.to_string())
                .collect::<Vec<_>>()
                .join(":");
            let flat = traj
                .grid
                .mode_index(m)
                .ok_or_else(|| Error::InvalidParameter(format!("mode {m:?} not on grid")))?;
            header.push(format!("re_{comp}_{label}"));
            header.push(format!("im_{comp}_{label}"));
            idx.push((comp, flat));
        }
    }
    header.extend(["mass", "norm_h1", "hamiltonian"].map(String::from));
    w.write_record(&header)?;
    let sc = (traj.grid.len() as f64).sqrt();
    for (k, s) in traj.states.iter().enumerate() {
        let mut row = vec![format!("{:.12e}", traj.times[k])];
        for &(comp, flat) in &idx {
            // Spectral coefficients scaled to Fourier-series amplitudes.
            let z = s.comps[comp][flat] / sc;
            row.push(format!("{:.15e}", z.re));
            row.push(format!("{:.15e}", z.im));
        }
        let h1: f64 = s
            .comps
            .iter()
            .map(|c| traj.grid.spectral_hk(c, 1.0).powi(2))
            .sum::<f64>()
            .sqrt();
        row.push(format!("{:.15e}", traj.mass[k]));
        row.push(format!("{:.15e}", h1));
        row.push(format!("{:.15e}", traj.hamiltonian[k]));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, Field};
    use crate::multipliers::PhysicalParams;
    use crate::propagators::evolve::evolve;
    use crate::propagators::system::{EvolutionSpec, State, SystemKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn snapshot_roundtrip() {
        let g = make_grid(2, 8, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = Field::random_bandlimited(&g, &mut rng, 3, 1.0);
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &g, f.spectral()).unwrap();
        write_snapshot(&mut buf, &g, f.spectral()).unwrap();
        assert_eq!(&buf[..4], b"NRLB");
        assert_eq!(buf.len(), 2 * (16 + 16 * 64));
        let recs = read_snapshots(&mut buf.as_slice()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].data, f.spectral());
        assert_eq!((recs[1].dim, recs[1].n), (2, 8));
        buf[0] = b'X';
        assert!(read_snapshots(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn csv_is_deterministic() {
        let g = make_grid(1, 32, 2.0 * std::f64::consts::PI).unwrap();
        let p = PhysicalParams::new(4.0, 1.0, 2).unwrap();
        let f = Field::from_fn(&g, |x| C64::new(0.1 * x[0].cos(), 0.0));
        let mut spec = EvolutionSpec::new(SystemKind::Nlkg, p, 0.01, 0.5);
        spec.sample_every = 10;
        let run = || {
            let tr = evolve(&g, &spec, &State::from_field(&f)).unwrap();
            let mut out = Vec::new();
            write_trajectory_csv(&mut out, &tr, &[vec![0], vec![1], vec![-1]]).unwrap();
            out
        };
        let a = run();
        assert_eq!(a, run());
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("t,re_0_0,im_0_0,re_0_1"));
        assert_eq!(text.lines().count(), 1 + 6);
    }
}
