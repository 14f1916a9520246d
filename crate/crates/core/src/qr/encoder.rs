//! Byte-mode QR symbol encoder (versions 1-40, all four error-correction
//! levels, automatic version and mask selection).

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EcLevel {
    L,
    M,
    Q,
    H,
}

impl EcLevel {
    fn ordinal(self) -> usize {
        match self {
            EcLevel::L => 0,
            EcLevel::M => 1,
            EcLevel::Q => 2,
            EcLevel::H => 3,
        }
    }

    fn format_bits(self) -> u32 {
        match self {
            EcLevel::L => 1,
            EcLevel::M => 0,
            EcLevel::Q => 3,
            EcLevel::H => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QrError {
    #[error("{0} bytes do not fit in any QR version at this error-correction level")]
    DataTooLong(usize),
}

#[rustfmt::skip]
const ECC_CODEWORDS_PER_BLOCK: [[u8; 41]; 4] = [
    [0,  7, 10, 15, 20, 26, 18, 20, 24, 30, 18, 20, 24, 26, 30, 22, 24, 28, 30, 28, 28, 28, 28, 30, 30, 26, 28, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30],
    [0, 10, 16, 26, 18, 24, 16, 18, 22, 22, 26, 30, 22, 22, 24, 24, 28, 28, 26, 26, 26, 26, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28],
    [0, 13, 22, 18, 26, 18, 24, 18, 22, 20, 24, 28, 26, 24, 20, 30, 24, 28, 28, 26, 30, 28, 30, 30, 30, 30, 28, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30],
    [0, 17, 28, 22, 16, 22, 28, 26, 26, 24, 28, 24, 28, 22, 24, 24, 30, 28, 28, 26, 28, 30, 24, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30],
];

#[rustfmt::skip]
const NUM_ECC_BLOCKS: [[u8; 41]; 4] = [
    [0, 1, 1, 1, 1, 1, 2, 2, 2, 2, 4,  4,  4,  4,  4,  6,  6,  6,  6,  7,  8,  8,  9,  9, 10, 12, 12, 12, 13, 14, 15, 16, 17, 18, 19, 19, 20, 21, 22, 24, 25],
    [0, 1, 1, 1, 2, 2, 4, 4, 4, 5, 5,  5,  8,  9,  9, 10, 10, 11, 13, 14, 16, 17, 17, 18, 20, 21, 23, 25, 26, 28, 29, 31, 33, 35, 37, 38, 40, 43, 45, 47, 49],
    [0, 1, 1, 2, 2, 4, 4, 6, 6, 8, 8,  8, 10, 12, 16, 12, 17, 16, 18, 21, 20, 23, 23, 25, 27, 29, 34, 34, 35, 38, 40, 43, 45, 48, 51, 53, 56, 59, 62, 65, 68],
    [0, 1, 1, 2, 4, 4, 4, 5, 6, 8, 8, 11, 11, 16, 16, 18, 16, 19, 21, 25, 25, 25, 34, 30, 32, 35, 37, 40, 42, 45, 48, 51, 54, 57, 60, 63, 66, 70, 74, 77, 81],
];

/// Modules available for data and ECC codewords, remainder bits included.
fn raw_data_modules(version: usize) -> usize {
    let mut result = (16 * version + 128) * version + 64;
    if version >= 2 {
        let align = version / 7 + 2;
        result -= (25 * align - 10) * align - 55;
        if version >= 7 {
            result -= 36;
        }
    }
    result
}

fn data_codewords(version: usize, ec: EcLevel) -> usize {
    raw_data_modules(version) / 8
        - ECC_CODEWORDS_PER_BLOCK[ec.ordinal()][version] as usize * NUM_ECC_BLOCKS[ec.ordinal()][version] as usize
}

fn alignment_positions(version: usize) -> Vec<usize> {
    if version == 1 {
        return Vec::new();
    }
    let count = version / 7 + 2;
    let step = if version == 32 { 26 } else { (version * 4 + count * 2 + 1) / (2 * count - 2) * 2 };
    let mut result = vec![6];
    let mut pos = version * 4 + 10;
    for _ in 0..count - 1 {
        result.insert(1, pos);
        pos -= step;
    }
    result
}

fn gf_mul(x: u8, y: u8) -> u8 {
    let mut z: u16 = 0;
    for i in (0..8).rev() {
        z = (z << 1) ^ ((z >> 7) * 0x11D);
        z ^= ((y as u16 >> i) & 1) * x as u16;
    }
    z as u8
}

fn rs_divisor(degree: usize) -> Vec<u8> {
    let mut result = vec![0u8; degree];
    result[degree - 1] = 1;
    let mut root = 1u8;
    for _ in 0..degree {
        for j in 0..degree {
            result[j] = gf_mul(result[j], root);
            if j + 1 < degree {
                result[j] ^= result[j + 1];
            }
        }
        root = gf_mul(root, 0x02);
    }
    result
}

fn rs_remainder(data: &[u8], divisor: &[u8]) -> Vec<u8> {
    let mut result = vec![0u8; divisor.len()];
    for &b in data {
        let factor = b ^ result.remove(0);
        result.push(0);
        for (r, &d) in result.iter_mut().zip(divisor) {
            *r ^= gf_mul(d, factor);
        }
    }
    result
}

struct BitBuffer(Vec<bool>);

impl BitBuffer {
    fn push(&mut self, value: u32, len: usize) {
        for i in (0..len).rev() {
            self.0.push((value >> i) & 1 != 0);
        }
    }
}

/// An encoded QR symbol. Module `(x, y)` is dark when `module(x, y)` is true.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QrCode {
    version: u8,
    size: usize,
    ec: EcLevel,
    mask: u8,
    modules: Vec<bool>,
    is_function: Vec<bool>,
}

impl QrCode {
    /// Encodes `data` in byte mode using the smallest version that fits.
    pub fn encode_bytes(data: &[u8], ec: EcLevel) -> Result<Self, QrError> {
        let version = (1..=40usize)
            .find(|&v| {
                let count_bits = if v <= 9 { 8 } else { 16 };
                data.len() < (1 << count_bits) && 4 + count_bits + data.len() * 8 <= data_codewords(v, ec) * 8
            })
            .ok_or(QrError::DataTooLong(data.len()))?;

        let capacity_bits = data_codewords(version, ec) * 8;
        let mut bits = BitBuffer(Vec::with_capacity(capacity_bits));
        bits.push(0b0100, 4);
        bits.push(data.len() as u32, if version <= 9 { 8 } else { 16 });
        for &b in data {
            bits.push(b as u32, 8);
        }
        let terminator = (capacity_bits - bits.0.len()).min(4);
        bits.push(0, terminator);
        let pad = (8 - bits.0.len() % 8) % 8;
        bits.push(0, pad);
        for &pad_byte in [0xECu32, 0x11].iter().cycle() {
            if bits.0.len() >= capacity_bits {
                break;
            }
            bits.push(pad_byte, 8);
        }
        let codewords: Vec<u8> = bits.0.chunks(8).map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | b as u8)).collect();

        let all = interleave_with_ecc(&codewords, version, ec);
        let mut code = QrCode::blank(version, ec);
        code.draw_codewords(&all);

        let mut best: Option<(u32, u8)> = None;
        for mask in 0..8u8 {
            code.apply_mask(mask);
            code.draw_format_bits(mask);
            let penalty = code.penalty();
            if best.is_none_or(|(p, _)| penalty < p) {
                best = Some((penalty, mask));
            }
            code.apply_mask(mask);
        }
        let mask = best.expect("eight masks evaluated").1;
        code.apply_mask(mask);
        code.draw_format_bits(mask);
        code.mask = mask;
        Ok(code)
    }

    pub fn version(&self) -> u8 {
        self.version
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn ec_level(&self) -> EcLevel {
        self.ec
    }

    pub fn mask(&self) -> u8 {
        self.mask
    }

    pub fn module(&self, x: usize, y: usize) -> bool {
        self.modules[y * self.size + x]
    }

    /// SVG path data covering every dark module, one unit per module.
    pub fn svg_path(&self) -> String {
        let mut d = String::new();
        for y in 0..self.size {
            for x in 0..self.size {
                if self.module(x, y) {
                    if !d.is_empty() {
                        d.push(' ');
                    }
                    d.push_str(&format!("M{x},{y}h1v1h-1z"));
                }
            }
        }
        d
    }

    fn blank(version: usize, ec: EcLevel) -> Self {
        let size = version * 4 + 17;
        let mut code = QrCode {
            version: version as u8,
            size,
            ec,
            mask: 0,
            modules: vec![false; size * size],
            is_function: vec![false; size * size],
        };
        code.draw_function_patterns();
        code
    }

    fn set_function(&mut self, x: usize, y: usize, dark: bool) {
        let i = y * self.size + x;
        self.modules[i] = dark;
        self.is_function[i] = true;
    }

    fn draw_function_patterns(&mut self) {
        let size = self.size;
        for i in 0..size {
            self.set_function(6, i, i % 2 == 0);
            self.set_function(i, 6, i % 2 == 0);
        }
        for (cx, cy) in [(3, 3), (size - 4, 3), (3, size - 4)] {
            for dy in -4i32..=4 {
                for dx in -4i32..=4 {
                    let (x, y) = (cx as i32 + dx, cy as i32 + dy);
                    if (0..size as i32).contains(&x) && (0..size as i32).contains(&y) {
                        let dist = dx.abs().max(dy.abs());
                        self.set_function(x as usize, y as usize, dist != 2 && dist != 4);
                    }
                }
            }
        }
        let align = alignment_positions(self.version as usize);
        let last = align.len().saturating_sub(1);
        for (i, &ax) in align.iter().enumerate() {
            for (j, &ay) in align.iter().enumerate() {
                if (i == 0 && j == 0) || (i == 0 && j == last) || (i == last && j == 0) {
                    continue;
                }
                for dy in -2i32..=2 {
                    for dx in -2i32..=2 {
                        let dark = dx.abs().max(dy.abs()) != 1;
                        self.set_function((ax as i32 + dx) as usize, (ay as i32 + dy) as usize, dark);
                    }
                }
            }
        }
        self.draw_format_bits(0);
        self.draw_version_bits();
    }

    fn draw_format_bits(&mut self, mask: u8) {
        let data = (self.ec.format_bits() << 3) | mask as u32;
        let mut rem = data;
        for _ in 0..10 {
            rem = (rem << 1) ^ ((rem >> 9) * 0x537);
        }
        let bits = ((data << 10) | rem) ^ 0x5412;
        let bit = |i: usize| (bits >> i) & 1 != 0;
        let size = self.size;

        for i in 0..=5 {
            self.set_function(8, i, bit(i));
        }
        self.set_function(8, 7, bit(6));
        self.set_function(8, 8, bit(7));
        self.set_function(7, 8, bit(8));
        for i in 9..15 {
            self.set_function(14 - i, 8, bit(i));
        }

        for i in 0..8 {
            self.set_function(size - 1 - i, 8, bit(i));
        }
        for i in 8..15 {
            self.set_function(8, size - 15 + i, bit(i));
        }
        self.set_function(8, size - 8, true);
    }

    fn draw_version_bits(&mut self) {
        let version = self.version as u32;
        if version < 7 {
            return;
        }
        let mut rem = version;
        for _ in 0..12 {
            rem = (rem << 1) ^ ((rem >> 11) * 0x1F25);
        }
        let bits = (version << 12) | rem;
        for i in 0..18 {
            let dark = (bits >> i) & 1 != 0;
            let a = self.size - 11 + i % 3;
            let b = i / 3;
            self.set_function(a, b, dark);
            self.set_function(b, a, dark);
        }
    }

    fn draw_codewords(&mut self, data: &[u8]) {
        let size = self.size;
        let total_bits = data.len() * 8;
        let mut i = 0;
        let mut right = size as i32 - 1;
        while right >= 1 {
            if right == 6 {
                right = 5;
            }
            for vert in 0..size {
                for j in 0..2 {
                    let x = (right - j) as usize;
                    let upward = ((right + 1) & 2) == 0;
                    let y = if upward { size - 1 - vert } else { vert };
                    let idx = y * size + x;
                    if !self.is_function[idx] && i < total_bits {
                        self.modules[idx] = (data[i >> 3] >> (7 - (i & 7))) & 1 != 0;
                        i += 1;
                    }
                }
            }
            right -= 2;
        }
    }

    /// XORs the mask pattern over data modules; applying twice undoes it.
    fn apply_mask(&mut self, mask: u8) {
        for y in 0..self.size {
            for x in 0..self.size {
                let invert = match mask {
                    0 => (x + y) % 2 == 0,
                    1 => y % 2 == 0,
                    2 => x % 3 == 0,
                    3 => (x + y) % 3 == 0,
                    4 => (x / 3 + y / 2) % 2 == 0,
                    5 => x * y % 2 + x * y % 3 == 0,
                    6 => (x * y % 2 + x * y % 3) % 2 == 0,
                    7 => ((x + y) % 2 + x * y % 3) % 2 == 0,
                    _ => unreachable!("mask pattern {mask}"),
                };
                let i = y * self.size + x;
                if invert && !self.is_function[i] {
                    self.modules[i] = !self.modules[i];
                }
            }
        }
    }

    fn penalty(&self) -> u32 {
        let size = self.size;
        let at = |x: usize, y: usize| self.modules[y * size + x];
        let mut total = 0u32;

        // Runs of five or more same-coloured modules, and finder look-alikes.
        for line in 0..size {
            for horizontal in [true, false] {
                let get = |k: usize| if horizontal { at(k, line) } else { at(line, k) };
                let mut run = 1;
                for k in 1..size {
                    if get(k) == get(k - 1) {
                        run += 1;
                    } else {
                        if run >= 5 {
                            total += 3 + (run - 5);
                        }
                        run = 1;
                    }
                }
                if run >= 5 {
                    total += 3 + (run - 5);
                }

                // Padded with four light modules of quiet zone on each side.
                let padded = |k: i32| (0..size as i32).contains(&k) && get(k as usize);
                const A: [bool; 11] = [true, false, true, true, true, false, true, false, false, false, false];
                for start in -4i32..size as i32 - 6 {
                    let window: Vec<bool> = (0..11).map(|o| padded(start + o)).collect();
                    if window == A || window.iter().rev().copied().eq(A) {
                        total += 40;
                    }
                }
            }
        }

        for y in 0..size - 1 {
            for x in 0..size - 1 {
                let c = at(x, y);
                if c == at(x + 1, y) && c == at(x, y + 1) && c == at(x + 1, y + 1) {
                    total += 3;
                }
            }
        }

        let dark = self.modules.iter().filter(|&&m| m).count() as i64;
        let cells = (size * size) as i64;
        let k = ((dark * 20 - cells * 10).abs() + cells - 1) / cells - 1;
        total + (k as u32) * 10
    }
}

fn interleave_with_ecc(data: &[u8], version: usize, ec: EcLevel) -> Vec<u8> {
    let blocks = NUM_ECC_BLOCKS[ec.ordinal()][version] as usize;
    let ecc_len = ECC_CODEWORDS_PER_BLOCK[ec.ordinal()][version] as usize;
    let raw = raw_data_modules(version) / 8;
    let short_blocks = blocks - raw % blocks;
    let short_len = raw / blocks;
    let divisor = rs_divisor(ecc_len);

    let mut split = Vec::with_capacity(blocks);
    let mut k = 0;
    for i in 0..blocks {
        let len = short_len - ecc_len + usize::from(i >= short_blocks);
        let chunk = &data[k..k + len];
        k += len;
        let mut block = chunk.to_vec();
        if i < short_blocks {
            block.push(0);
        }
        block.extend(rs_remainder(chunk, &divisor));
        split.push(block);
    }

    let mut out = Vec::with_capacity(raw);
    for i in 0..split[0].len() {
        for (j, block) in split.iter().enumerate() {
            if i != short_len - ecc_len || j >= short_blocks {
                out.push(block[i]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decode(code: &QrCode) -> String {
        let quiet = 4;
        let scale = 4;
        let side = (code.size() + 2 * quiet) * scale;
        let mut img = rqrr::PreparedImage::prepare_from_greyscale(side, side, |x, y| {
            let (mx, my) = (x / scale, y / scale);
            let inside = (quiet..quiet + code.size()).contains(&mx) && (quiet..quiet + code.size()).contains(&my);
            if inside && code.module(mx - quiet, my - quiet) {
                0
            } else {
                255
            }
        });
        let grids = img.detect_grids();
        assert_eq!(grids.len(), 1, "one symbol detected");
        grids[0].decode().expect("decodes").1
    }

    #[test]
    fn gf_multiplication() {
        assert_eq!(gf_mul(0, 7), 0);
        assert_eq!(gf_mul(1, 0x53), 0x53);
        assert_eq!(gf_mul(2, 0x80), 0x1D);
    }

    #[test]
    fn capacities_match_published_byte_limits() {
        // Byte-mode capacities at level M for versions 1, 2, 7 and 10.
        let cap = |v: usize| (data_codewords(v, EcLevel::M) * 8 - 4 - if v <= 9 { 8 } else { 16 }) / 8;
        assert_eq!(cap(1), 14);
        assert_eq!(cap(2), 26);
        assert_eq!(cap(7), 122);
        assert_eq!(cap(10), 213);
        assert_eq!(data_codewords(40, EcLevel::L), 2956);
    }

    #[test]
    fn card_payload_uses_version_two() {
        let code = QrCode::encode_bytes(b"MLE1|people|family|B546", EcLevel::M).unwrap();
        assert_eq!(code.version(), 2);
        assert_eq!(code.size(), 25);
        assert_eq!(decode(&code), "MLE1|people|family|B546");
    }

    #[test]
    fn round_trips_across_versions_and_levels() {
        for len in [1usize, 14, 15, 40, 100, 150, 300, 600] {
            let text: String = (0..len).map(|i| char::from(b'a' + (i % 26) as u8)).collect();
            for ec in [EcLevel::L, EcLevel::M, EcLevel::Q, EcLevel::H] {
                let code = QrCode::encode_bytes(text.as_bytes(), ec).unwrap();
                assert_eq!(decode(&code), text, "len {len} ec {ec:?} v{}", code.version());
            }
        }
    }

    #[test]
    fn oversized_input_is_rejected() {
        assert_eq!(QrCode::encode_bytes(&[0u8; 3000], EcLevel::M), Err(QrError::DataTooLong(3000)));
    }
}
