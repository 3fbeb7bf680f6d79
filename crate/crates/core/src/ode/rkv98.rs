// Verner 9(8) "efficient" pair RKV98 IIa, 16 stages.

pub const STAGES: usize = 16;

pub const C: [f64; STAGES] = [
    0.0,
    0.03571,
    0.09906028091267415,
    0.1485904213690112,
    0.6134,
    0.2327359473605627,
    0.5538640526394373,
    0.6555,
    0.491625,
    0.06858,
    0.253,
    0.6620641795412046,
    0.8309,
    0.8998,
    1.0,
    1.0,
];

pub const A: [[f64; STAGES]; STAGES] = [
    [
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    ],
    [
        0.03571, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    ],
    [
        -0.03833735636677017,
        0.13739763727944432,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.0371476053422528,
        0.0,
        0.11144281602675842,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2.674764429871505,
        0.0,
        -9.982382134885293,
        7.921017705013789,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.05242104050577351,
        0.0,
        0.0,
        0.17969111891759532,
        0.0006237879371938568,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.15924922236476322,
        0.0,
        0.0,
        -0.4298429877241087,
        0.06665266542726088,
        0.757805152571522,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.07283333333333333,
        0.0,
        0.0,
        0.0,
        0.0,
        0.33593445906651037,
        0.2467322076001563,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.0729755859375,
        0.0,
        0.0,
        0.0,
        0.0,
        0.33480097296993333,
        0.11841582390506665,
        -0.0345673828125,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.049112136634520964,
        0.0,
        0.0,
        0.0,
        0.0,
        0.03983857361308652,
        0.10696752889393549,
        -0.021742591654586477,
        -0.10559564748695649,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        -0.027079888186412805,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0333,
        -0.16455260700360572,
        0.0342826630649739,
        0.1585264064439221,
        0.2185234256811225,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.055846577691088625,
        0.0,
        0.0,
        0.0,
        0.0,
        0.09166533166672539,
        0.2392399655523627,
        0.01023834712248415,
        -0.0026793313228595426,
        0.042356241814742845,
        0.2253970470166604,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        -0.4802510512725196,
        0.0,
        0.0,
        0.0,
        0.0,
        -6.3596101625559305,
        -0.2762313898040841,
        -6.500796633979847,
        0.5734765877040957,
        1.3471259948681389,
        5.936840409706221,
        6.590346245333925,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.3307533067671401,
        0.0,
        0.0,
        0.0,
        0.0,
        5.956207776829962,
        -0.48683164004815277,
        4.462055288206771,
        0.7410258231442072,
        -0.7118192034575913,
        -5.454619594516665,
        -4.14080372924471,
        0.20383197231903866,
        0.0,
        0.0,
        0.0,
    ],
    [
        -0.5847111122998945,
        0.0,
        0.0,
        0.0,
        0.0,
        -12.41268417116267,
        1.360245445660928,
        -22.426105311118683,
        -0.8828857055865458,
        1.7701551285382304,
        12.158096519185339,
        22.230375204077607,
        -0.6634483760201249,
        0.45096237872581374,
        0.0,
        0.0,
    ],
    [
        1.9405755498106487,
        0.0,
        0.0,
        0.0,
        0.0,
        21.977984081145564,
        0.8230747326984729,
        68.16441683626354,
        -3.117097463620267,
        -4.56884102182244,
        -18.74190987126265,
        -66.57711839637832,
        1.0989155531654418,
        0.0,
        0.0,
        0.0,
    ],
];

/// Ninth-order weights.
pub const B_HIGH: [f64; STAGES] = [
    0.015006690149797247,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    -1.0551809927463813,
    0.2384947263782183,
    0.12881517742829915,
    0.22766231110462157,
    1.2295325874375174,
    0.04624976662810384,
    0.13861963193662938,
    0.030800101683194355,
    0.0,
];

/// Embedded eighth-order weights.
pub const B_LOW: [f64; STAGES] = [
    0.018972105324811014,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    3.4081103145494938,
    0.1260323883820921,
    0.11883750634511497,
    0.24910419978386875,
    -3.2699662199289783,
    0.3023798100228883,
    0.0,
    0.0,
    0.04652989552070924,
];
