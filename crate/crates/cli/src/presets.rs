/// A reproducible render setup: model, window and palette.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub model: &'static str,
    pub window: [f64; 4],
    pub palette: &'static str,
}

const EXAMPLE1_WINDOW: [f64; 4] = [-10.0, 8.0, -12.0, 12.0];
const GAMMA_WINDOW: [f64; 4] = [-5.0, 10.0, -10.0, 10.0];

/// Default resolution of every preset.
pub const PRESET_RES: (usize, usize) = (300, 400);

pub const PRESETS: [Preset; 6] = [
    Preset {
        name: "fig1-left",
        model: "example1:lambda=0.5",
        window: EXAMPLE1_WINDOW,
        palette: "fig1",
    },
    Preset {
        name: "fig1-mid",
        model: "example1:lambda=1",
        window: EXAMPLE1_WINDOW,
        palette: "fig1",
    },
    Preset {
        name: "fig1-right",
        model: "example1:lambda=2",
        window: EXAMPLE1_WINDOW,
        palette: "fig1",
    },
    Preset {
        name: "fig2-left",
        model: "gamma",
        window: GAMMA_WINDOW,
        palette: "fig2",
    },
    Preset {
        name: "fig2-mid",
        model: "gamma_shift1",
        window: GAMMA_WINDOW,
        palette: "fig2",
    },
    Preset {
        name: "fig2-right",
        model: "gamma_cos",
        window: GAMMA_WINDOW,
        palette: "fig2",
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}
