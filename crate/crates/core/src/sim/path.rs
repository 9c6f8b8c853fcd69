use std::io::{self, Read, Write};

use crate::error::{Error, Result};

/// One sampled trajectory on `[0, T]`. Cemetery states are stored as NaN coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub dim: usize,
    pub times: Vec<f64>,
    /// Row-major `times.len() × dim`.
    pub states: Vec<f64>,
    pub alive: Vec<bool>,
    /// First grid time outside the compact `K` (cemetery counts as outside); `+∞` if never.
    pub sigma_k: f64,
    /// Killing time; `+∞` if the path survives.
    pub zeta: f64,
}

impl Path {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start(&self) -> &[f64] {
        self.state(0).expect("paths start alive")
    }

    /// State at grid index `i`, `None` in the cemetery.
    pub fn state(&self, i: usize) -> Option<&[f64]> {
        self.alive[i].then(|| &self.states[i * self.dim..(i + 1) * self.dim])
    }

    /// Last grid index with time `≤ t`.
    pub fn index_at(&self, t: f64) -> usize {
        self.times.partition_point(|s| *s <= t).saturating_sub(1)
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// Asserts the structural invariants: states alive exactly before `zeta`, absorbing cemetery.
    pub fn check_invariants(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Numeric { what: m, residual: f64::NAN });
        if self.states.len() != self.times.len() * self.dim || self.alive.len() != self.times.len() {
            return bad("path buffers have inconsistent lengths".into());
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return bad("path times are not increasing".into());
        }
        for i in 0..self.len() {
            if self.alive[i] != (self.times[i] < self.zeta) {
                return bad(format!("alive flag at t = {} disagrees with zeta = {}", self.times[i], self.zeta));
            }
            let s = &self.states[i * self.dim..(i + 1) * self.dim];
            if self.alive[i] == s.iter().any(|v| v.is_nan()) {
                return bad(format!("cemetery marker inconsistent at t = {}", self.times[i]));
            }
            if i > 0 && !self.alive[i - 1] && self.alive[i] {
                return bad("cemetery is not absorbing".into());
            }
        }
        Ok(())
    }
}

/// `X_{t ∧ σ_K}` with previous-point interpolation; `None` is the cemetery.
pub fn stopped_state(path: &Path, t: f64) -> Option<Vec<f64>> {
    let s = t.min(path.sigma_k);
    if s >= path.zeta {
        return None;
    }
    path.state(path.index_at(s)).map(|v| v.to_vec())
}

/// CSV with columns `t, x1..xd, alive`; cemetery coordinates are written as `NaN`.
pub fn write_csv<W: Write>(path: &Path, mut w: W) -> io::Result<()> {
    let mut header = String::from("t");
    for j in 1..=path.dim {
        header.push_str(&format!(",x{j}"));
    }
    header.push_str(",alive\n");
    w.write_all(header.as_bytes())?;
    for i in 0..path.len() {
        let mut line = format!("{}", path.times[i]);
        for v in &path.states[i * path.dim..(i + 1) * path.dim] {
            line.push_str(&format!(",{v}"));
        }
        line.push_str(if path.alive[i] { ",1\n" } else { ",0\n" });
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub const BINARY_MAGIC: &[u8; 8] = b"FSLPATH1";

/// Little-endian record: magic `FSLPATH1`, `u32` d, `u64` n_steps, then `f64` sigma_K, zeta and
/// for each grid point `t, x_1..x_d, alive` (alive as 1.0 or 0.0).
pub fn write_binary<W: Write>(path: &Path, mut w: W) -> io::Result<()> {
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&(path.dim as u32).to_le_bytes())?;
    w.write_all(&(path.len() as u64).to_le_bytes())?;
    w.write_all(&path.sigma_k.to_le_bytes())?;
    w.write_all(&path.zeta.to_le_bytes())?;
    for i in 0..path.len() {
        w.write_all(&path.times[i].to_le_bytes())?;
        for v in &path.states[i * path.dim..(i + 1) * path.dim] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&(if path.alive[i] { 1.0f64 } else { 0.0 }).to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<Path> {
    let io_err = |e: io::Error| Error::arg(format!("truncated path record: {e}"));
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io_err)?;
    if &magic != BINARY_MAGIC {
        return Err(Error::arg("not an FSLPATH1 record"));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4).map_err(io_err)?;
    let dim = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b8).map_err(io_err)?;
    let n = u64::from_le_bytes(b8) as usize;
    let mut f = || -> Result<f64> {
        r.read_exact(&mut b8).map_err(io_err)?;
        Ok(f64::from_le_bytes(b8))
    };
    let sigma_k = f()?;
    let zeta = f()?;
    let mut times = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n * dim);
    let mut alive = Vec::with_capacity(n);
    for _ in 0..n {
        times.push(f()?);
        for _ in 0..dim {
            states.push(f()?);
        }
        alive.push(f()? == 1.0);
    }
    Ok(Path { dim, times, states, alive, sigma_k, zeta })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Path {
        Path {
            dim: 1,
            times: vec![0.0, 0.5, 1.0, 1.5],
            states: vec![1.0, 2.0, 3.0, f64::NAN],
            alive: vec![true, true, true, false],
            sigma_k: 1.0,
            zeta: 1.25,
        }
    }

    #[test]
    fn stopping_and_cemetery() {
        let p = sample();
        p.check_invariants().unwrap();
        assert_eq!(stopped_state(&p, 0.0), Some(vec![1.0]));
        assert_eq!(stopped_state(&p, 0.7), Some(vec![2.0]));
        assert_eq!(stopped_state(&p, 1.4), Some(vec![3.0]));
        let mut q = p.clone();
        q.sigma_k = f64::INFINITY;
        assert_eq!(stopped_state(&q, 1.3), None);
        assert_eq!(stopped_state(&q, 1.2), Some(vec![3.0]));
    }

    #[test]
    fn invariant_violations_detected() {
        let mut p = sample();
        p.alive[3] = true;
        assert!(p.check_invariants().is_err());
        let mut p = sample();
        p.states[1] = f64::NAN;
        assert!(p.check_invariants().is_err());
    }

    #[test]
    fn binary_round_trip() {
        let p = sample();
        let mut buf = Vec::new();
        write_binary(&p, &mut buf).unwrap();
        assert_eq!(&buf[..8], b"FSLPATH1");
        assert_eq!(buf.len(), 8 + 4 + 8 + 16 + 4 * 3 * 8);
        let q = read_binary(&buf[..]).unwrap();
        assert_eq!(q.times, p.times);
        assert_eq!(q.alive, p.alive);
        assert!(q.states[3].is_nan());
        assert_eq!((q.sigma_k, q.zeta), (1.0, 1.25));
        assert!(read_binary(&buf[..20]).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&sample(), &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "t,x1,alive\n0,1,1\n0.5,2,1\n1,3,1\n1.5,NaN,0\n");
    }
}
