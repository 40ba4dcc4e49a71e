use super::canvas::Rgb;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Palette {
    pub id: usize,
    pub colors: &'static [Rgb],
    pub background: Rgb,
}

pub const PALETTES: [Palette; 8] = [
    Palette {
        id: 0,
        colors: &[[230, 57, 70], [241, 250, 238], [168, 218, 220], [69, 123, 157]],
        background: [0, 0, 0],
    },
    Palette {
        id: 1,
        colors: &[[255, 190, 11], [251, 86, 7], [255, 0, 110], [131, 56, 236], [58, 134, 255]],
        background: [0, 0, 0],
    },
    Palette {
        id: 2,
        colors: &[[38, 70, 83], [42, 157, 143], [233, 196, 106], [244, 162, 97], [231, 111, 81]],
        background: [0, 0, 0],
    },
    Palette {
        id: 3,
        colors: &[[0, 255, 159], [0, 184, 255], [0, 30, 255], [189, 0, 255], [214, 0, 255]],
        background: [0, 0, 0],
    },
    Palette {
        id: 4,
        colors: &[[255, 255, 255], [180, 180, 180], [110, 110, 110]],
        background: [0, 0, 0],
    },
    Palette {
        id: 5,
        colors: &[[255, 89, 94], [255, 202, 58], [138, 201, 38], [25, 130, 196], [106, 76, 147]],
        background: [0, 0, 0],
    },
    Palette {
        id: 6,
        colors: &[[13, 59, 102], [250, 240, 202], [244, 211, 94], [238, 150, 75], [249, 87, 56]],
        background: [0, 0, 0],
    },
    Palette {
        id: 7,
        colors: &[[255, 0, 0], [0, 255, 0], [0, 0, 255], [255, 255, 0]],
        background: [0, 0, 0],
    },
];

/// Palette by id; ids wrap around the table.
pub fn palette(id: usize) -> &'static Palette {
    &PALETTES[id % PALETTES.len()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_shape() {
        assert!(PALETTES.len() >= 8);
        for (i, p) in PALETTES.iter().enumerate() {
            assert_eq!(p.id, i);
            assert!(p.colors.len() >= 2);
            assert!(p.colors.iter().all(|c| *c != p.background));
        }
        assert_eq!(palette(9).id, 1);
    }
}
