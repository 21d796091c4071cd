//! Published threshold tables, dollars, 2003 through 2018 unless noted.

use ctcsim::params::ParentalGroup::{self, Married, SingleFather, SingleMother};

pub const ONE_CHILD_CREDIT_MARRIED: [i64; 16] = [
    28650, 29000, 29600, 30200, 30900, 31400, 32350, 32350, 32700, 33300, 33900, 34250, 34600,
    34750, 34850, 43850,
];
pub const ONE_CHILD_CREDIT_SINGLE: [i64; 16] = [
    23100, 23350, 23700, 24150, 24650, 25000, 25650, 25700, 25900, 26300, 26750, 27000, 27250,
    27400, 27450, 36950,
];
pub const ONE_CHILD_REFUND_MARRIED: [i64; 16] = [
    19565, 17414, 17664, 17964, 18414, 15164, 9664, 9664, 9664, 9664, 9664, 9664, 9664, 9664, 9664,
    11830,
];
pub const ONE_CHILD_REFUND_SINGLE: [i64; 16] = [
    16795, 15787, 16070, 16437, 16907, 15097, 9664, 9664, 9664, 9664, 9664, 9664, 9664, 9664, 9664,
    11830,
];

pub const AVG_CHILDREN_CREDIT: [(ParentalGroup, [i64; 16]); 3] = [
    (
        Married,
        [
            38631, 39223, 40013, 40770, 41743, 42567, 43765, 43782, 44156, 45082, 45921, 46309,
            47017, 47138, 47271, 58675,
        ],
    ),
    (
        SingleFather,
        [
            29707, 30351, 30855, 31177, 31895, 32498, 33212, 33365, 33562, 34113, 34958, 35521,
            35660, 35985, 35640, 48433,
        ],
    ),
    (
        SingleMother,
        [
            30096, 30742, 31349, 31775, 32399, 33108, 33934, 33984, 33977, 34741, 35486, 35734,
            36087, 36414, 36497, 49433,
        ],
    ),
];
pub const AVG_CHILDREN_REFUND: [(ParentalGroup, [i64; 16]); 3] = [
    (
        Married,
        [
            25380, 22765, 23190, 23595, 24180, 21167, 15600, 15600, 15533, 15600, 15600, 15533,
            15667, 15600, 15600, 20140,
        ],
    ),
    (
        SingleFather,
        [
            21235, 19510, 19830, 20057, 20555, 18825, 14133, 14200, 14133, 14133, 14267, 14400,
            14267, 14333, 14067, 18165,
        ],
    ),
    (
        SingleMother,
        [
            21500, 19720, 20093, 20375, 20823, 19150, 14600, 14600, 14400, 14533, 14600, 14533,
            14533, 14600, 14600, 18500,
        ],
    ),
];
pub const AVG_CHILDREN_TOTAL_PHASEOUT: [(ParentalGroup, [i64; 16]); 3] = [
    (
        Married,
        [
            147800, 148000, 148000, 147800, 147800, 148000, 147800, 147800, 147600, 147800, 147800,
            147600, 148000, 147800, 147800, 475600,
        ],
    ),
    (
        SingleFather,
        [
            108600, 109200, 109200, 108600, 108600, 108800, 108400, 108600, 108400, 108400, 108800,
            109200, 108800, 109000, 108200, 267600,
        ],
    ),
    (
        SingleMother,
        [
            109400, 110000, 110200, 109800, 109600, 110000, 109800, 109800, 109200, 109600, 109800,
            109600, 109600, 109800, 109800, 270000,
        ],
    ),
];
pub const AVG_CHILDREN_EXEMPTIONS: [(ParentalGroup, [i64; 15]); 3] = [
    (
        Married,
        [
            11865, 12090, 12480, 12837, 13226, 13650, 14199, 14199, 14356, 14782, 15171, 15326,
            15600, 15755, 15755,
        ],
    ),
    (
        SingleFather,
        [
            8174, 8401, 8672, 8844, 9112, 9415, 9746, 9782, 9879, 10146, 10491, 10705, 10760,
            10935, 10773,
        ],
    ),
    (
        SingleMother,
        [
            8296, 8525, 8832, 9042, 9282, 9625, 10001, 10001, 10027, 10374, 10686, 10784, 10920,
            11097, 11097,
        ],
    ),
];

/// (group, year, refund, credit) at the refund-pathway threshold.
pub const ONE_CHILD_BREAKDOWN: [(ParentalGroup, i32, i64, i64); 7] = [
    (Married, 2003, 907, 93),
    (SingleMother, 2003, 630, 370),
    (SingleMother, 2004, 756, 244),
    (SingleMother, 2005, 761, 239),
    (SingleMother, 2006, 771, 229),
    (SingleMother, 2007, 774, 226),
    (SingleMother, 2008, 990, 10),
];
pub const AVG_CHILDREN_BREAKDOWN: [(ParentalGroup, i32, i64, i64); 19] = [
    (Married, 2003, 1488, 402),
    (Married, 2004, 1802, 98),
    (Married, 2005, 1829, 71),
    (Married, 2006, 1844, 46),
    (Married, 2007, 1865, 25),
    (SingleFather, 2003, 1074, 606),
    (SingleFather, 2004, 1314, 396),
    (SingleFather, 2005, 1325, 386),
    (SingleFather, 2006, 1314, 366),
    (SingleFather, 2007, 1321, 359),
    (SingleFather, 2008, 1549, 141),
    (SingleFather, 2018, 2350, 17),
    (SingleMother, 2003, 1100, 620),
    (SingleMother, 2004, 1346, 405),
    (SingleMother, 2005, 1364, 396),
    (SingleMother, 2006, 1361, 378),
    (SingleMother, 2007, 1361, 369),
    (SingleMother, 2008, 1598, 153),
    (SingleMother, 2018, 2400, 50),
];
