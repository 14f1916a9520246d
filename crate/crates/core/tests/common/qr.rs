use mle_core::qr::{decode_payload, encode_payload};
use rand::Rng;

/// Module grids recovered from the `<g class="qr">` groups of an SVG page,
/// with the payload each claims to carry.
pub fn qr_groups(svg: &str) -> Vec<(String, Vec<Vec<bool>>)> {
    let attr = |s: &str, name: &str| -> String {
        let start = s.find(&format!("{name}=\"")).unwrap() + name.len() + 2;
        let end = start + s[start..].find('"').unwrap();
        s[start..end].to_owned()
    };
    svg.split("<g class=\"qr\"")
        .skip(1)
        .map(|group| {
            let group = &group[..group.find("</g>").unwrap()];
            let size: usize = attr(group, "data-modules").parse().unwrap();
            let path = &group[group.find("<path").unwrap()..];
            let mut grid = vec![vec![false; size]; size];
            for cmd in attr(path, "d").split_whitespace() {
                let xy = cmd.strip_prefix('M').unwrap().strip_suffix("h1v1h-1z").unwrap();
                let (x, y) = xy.split_once(',').unwrap();
                grid[y.parse::<usize>().unwrap()][x.parse::<usize>().unwrap()] = true;
            }
            (attr(group, "data-payload").replace("&amp;", "&"), grid)
        })
        .collect()
}

pub fn decode_with_rqrr(grid: &[Vec<bool>]) -> String {
    let quiet = 4;
    let scale = 4;
    let side = (grid.len() + 2 * quiet) * scale;
    let mut image = rqrr::PreparedImage::prepare_from_greyscale(side, side, |x, y| {
        let (mx, my) = (x / scale, y / scale);
        let dark = mx >= quiet
            && my >= quiet
            && mx - quiet < grid.len()
            && my - quiet < grid.len()
            && grid[my - quiet][mx - quiet];
        if dark {
            0
        } else {
            255
        }
    });
    let grids = image.detect_grids();
    assert_eq!(grids.len(), 1, "expected exactly one symbol");
    grids[0].decode().unwrap().1
}

pub fn random_id<R: Rng>(rng: &mut R) -> String {
    const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789_-";
    (0..rng.gen_range(1..16)).map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())] as char).collect()
}

/// Tries every other value at every byte of the payload for `deck`/`card`.
/// Returns how many corruptions were tried and the ones the decoder
/// accepted. Byte strings that are not UTF-8 cannot reach the decoder and
/// count as rejected.
pub fn single_byte_corruptions(deck: &str, card: &str) -> (u64, Vec<String>) {
    let payload = encode_payload(deck, card).unwrap().into_bytes();
    let mut tried = 0;
    let mut accepted = Vec::new();
    for i in 0..payload.len() {
        for b in 0..=255u8 {
            if b == payload[i] {
                continue;
            }
            let mut bad = payload.clone();
            bad[i] = b;
            tried += 1;
            if let Ok(s) = std::str::from_utf8(&bad) {
                if decode_payload(s).is_ok() {
                    accepted.push(s.to_owned());
                }
            }
        }
    }
    (tried, accepted)
}
