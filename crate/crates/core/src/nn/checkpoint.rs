//! Binary tensor checkpoints.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "6GAN"  u32 version  u32 count
//! count × { u32 name_len, name (utf-8), u32 ndims, ndims × u64 dim, Π dims × f64 }
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{NnError, Tensor};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"6GAN";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint<W: Write>(mut w: W, tensors: &[(String, &Tensor)]) -> Result<(), NnError> {
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(tensors.len() as u32).to_le_bytes())?;
    for (name, t) in tensors {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        w.write_all(&(t.shape().len() as u32).to_le_bytes())?;
        for &d in t.shape() {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        for &x in t.data() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32, NnError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64, NnError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

// Guards against allocating absurd sizes from a corrupt header.
const MAX_ELEMENTS: u64 = 1 << 31;

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Vec<(String, Tensor)>, NnError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(NnError::Checkpoint("wrong magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(NnError::Checkpoint(format!("unsupported version {version}")));
    }
    let count = read_u32(&mut r)?;
    let mut out = Vec::with_capacity(count.min(1024) as usize);
    for _ in 0..count {
        let name_len = read_u32(&mut r)? as usize;
        if name_len > 4096 {
            return Err(NnError::Checkpoint("tensor name too long".into()));
        }
        let mut name = vec![0u8; name_len];
        r.read_exact(&mut name)?;
        let name = String::from_utf8(name)
            .map_err(|_| NnError::Checkpoint("tensor name is not utf-8".into()))?;
        let ndims = read_u32(&mut r)?;
        if ndims > 8 {
            return Err(NnError::Checkpoint(format!("{name}: {ndims} dimensions")));
        }
        let mut shape = Vec::with_capacity(ndims as usize);
        let mut total: u64 = 1;
        for _ in 0..ndims {
            let d = read_u64(&mut r)?;
            total = total.saturating_mul(d);
            shape.push(d as usize);
        }
        if total > MAX_ELEMENTS {
            return Err(NnError::Checkpoint(format!("{name}: {total} elements")));
        }
        let mut data = Vec::with_capacity(total as usize);
        let mut b = [0u8; 8];
        for _ in 0..total {
            r.read_exact(&mut b)?;
            data.push(f64::from_le_bytes(b));
        }
        out.push((name, Tensor::from_vec(&shape, data)?));
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(NnError::Checkpoint("trailing bytes".into()));
    }
    Ok(out)
}

pub fn save_checkpoint(path: &Path, tensors: &[(String, &Tensor)]) -> Result<(), NnError> {
    write_checkpoint(BufWriter::new(File::create(path)?), tensors)
}

pub fn load_checkpoint(path: &Path) -> Result<Vec<(String, Tensor)>, NnError> {
    read_checkpoint(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let a = Tensor::from_vec(&[2, 2], vec![1.0, -0.0, f64::MIN_POSITIVE, 1e300]).unwrap();
        let b = Tensor::from_vec(&[3], vec![0.1, 0.2, 0.3]).unwrap();
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &[("a".into(), &a), ("bias".into(), &b)]).unwrap();
        assert_eq!(&buf[..4], b"6GAN");
        let back = read_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(back[0].0, "a");
        let bits = |t: &Tensor| t.data().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back[0].1), bits(&a));
        assert_eq!(back[1].1, b);
    }

    #[test]
    fn rejects_corruption() {
        let t = Tensor::zeros(&[1]);
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &[("t".into(), &t)]).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'7';
        assert!(read_checkpoint(bad.as_slice()).is_err());
        assert!(read_checkpoint(&buf[..buf.len() - 1]).is_err());
        let mut extra = buf;
        extra.push(0);
        assert!(read_checkpoint(extra.as_slice()).is_err());
    }
}
