use std::io::{self, Read, Write};

use super::{DenseMatrix, Spectrum};

const MAGIC: &[u8; 4] = b"NYST";

/// CSV with columns `index,eigenvalue,char_number`; the characteristic
/// number is left empty for eigenvalues that are not numerically positive.
pub fn write_spectrum_csv<W: Write>(spectrum: &Spectrum, mut out: W) -> io::Result<()> {
    writeln!(out, "index,eigenvalue,char_number")?;
    for (i, &l) in spectrum.eigenvalues.iter().enumerate() {
        if l > spectrum.eps_pos {
            writeln!(out, "{},{},{}", i + 1, l, 1.0 / l)?;
        } else {
            writeln!(out, "{},{},", i + 1, l)?;
        }
    }
    Ok(())
}

/// Debug dump: 16-byte little-endian header (`NYST`, u32 N, u32 d, u32 0)
/// followed by the N×N entries as row-major f64.
pub fn write_matrix_binary<W: Write>(matrix: &DenseMatrix, d: u32, mut out: W) -> io::Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&(matrix.n() as u32).to_le_bytes())?;
    out.write_all(&d.to_le_bytes())?;
    out.write_all(&0u32.to_le_bytes())?;
    for x in matrix.as_slice() {
        out.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_matrix_binary<R: Read>(mut input: R) -> io::Result<(DenseMatrix, u32)> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header)?;
    if &header[..4] != MAGIC {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "bad magic"));
    }
    let word = |k: usize| u32::from_le_bytes(header[k..k + 4].try_into().unwrap());
    let (n, d) = (word(4) as usize, word(8));
    let mut data = vec![0.0; n * n];
    let mut buf = [0u8; 8];
    for x in data.iter_mut() {
        input.read_exact(&mut buf)?;
        *x = f64::from_le_bytes(buf);
    }
    Ok((DenseMatrix::from_raw(n, data), d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_csv() {
        let s = Spectrum::from_eigenvalues(vec![2.0, 0.5, 0.0]);
        let mut buf = vec![];
        write_spectrum_csv(&s, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "index,eigenvalue,char_number\n1,2,0.5\n2,0.5,2\n3,0,\n"
        );
    }

    #[test]
    fn matrix_binary_layout() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 3.5]]);
        let mut buf = vec![];
        write_matrix_binary(&m, 2, &mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 4 * 8);
        assert_eq!(&buf[..4], b"NYST");
        assert_eq!(&buf[4..8], &[2, 0, 0, 0]);
        assert_eq!(&buf[8..12], &[2, 0, 0, 0]);
        assert_eq!(&buf[16..24], &1.0f64.to_le_bytes());
        let (back, d) = read_matrix_binary(&buf[..]).unwrap();
        assert_eq!((back, d), (m, 2));
        assert!(read_matrix_binary(&b"XXXX\0\0\0\0\0\0\0\0\0\0\0\0"[..]).is_err());
    }
}
