// Generated from the endpoint enumeration in `oracle.rs` (endpoints 0..=7).
// Rows: first relation, columns: second relation, both in `AllenRelation::ALL` order.
// Bit i set means `AllenRelation::ALL[i]` belongs to the composition.
pub(super) const COMPOSITION: [[u16; 13]; 13] = [
    // Before
    [
        0x0001, 0x1fff, 0x0001, 0x0155, 0x0001, 0x0155, 0x0001, 0x0001, 0x0155, 0x0001, 0x0155, 0x0001, 0x0001,
    ],
    // After
    [
        0x1fff, 0x0002, 0x052a, 0x0002, 0x052a, 0x0002, 0x052a, 0x0002, 0x052a, 0x0002, 0x0002, 0x0002, 0x0002,
    ],
    // Meets
    [
        0x0001, 0x02aa, 0x0001, 0x1c00, 0x0001, 0x0150, 0x0004, 0x0004, 0x0150, 0x0001, 0x0150, 0x0001, 0x0004,
    ],
    // MetBy
    [
        0x0a15, 0x0002, 0x10c0, 0x0002, 0x0520, 0x0002, 0x0520, 0x0002, 0x0520, 0x0002, 0x0008, 0x0008, 0x0008,
    ],
    // Overlaps
    [
        0x0001, 0x02aa, 0x0001, 0x02a0, 0x0015, 0x1ff0, 0x0010, 0x0a10, 0x0150, 0x0a15, 0x0150, 0x0015, 0x0010,
    ],
    // OverlappedBy
    [
        0x0a15, 0x0002, 0x0a10, 0x0002, 0x1ff0, 0x002a, 0x0520, 0x002a, 0x0520, 0x02aa, 0x0020, 0x02a0, 0x0020,
    ],
    // Starts
    [
        0x0001, 0x0002, 0x0001, 0x0008, 0x0015, 0x0520, 0x0040, 0x10c0, 0x0100, 0x0a15, 0x0100, 0x0015, 0x0040,
    ],
    // StartedBy
    [
        0x0a15, 0x0002, 0x0a10, 0x0008, 0x0a10, 0x0020, 0x10c0, 0x0080, 0x0520, 0x0200, 0x0020, 0x0200, 0x0080,
    ],
    // During
    [
        0x0001, 0x0002, 0x0001, 0x0002, 0x0155, 0x052a, 0x0100, 0x052a, 0x0100, 0x1fff, 0x0100, 0x0155, 0x0100,
    ],
    // Contains
    [
        0x0a15, 0x02aa, 0x0a10, 0x02a0, 0x0a10, 0x02a0, 0x0a10, 0x0200, 0x1ff0, 0x0200, 0x02a0, 0x0200, 0x0200,
    ],
    // Finishes
    [
        0x0001, 0x0002, 0x0004, 0x0002, 0x0150, 0x002a, 0x0100, 0x002a, 0x0100, 0x02aa, 0x0400, 0x1c00, 0x0400,
    ],
    // FinishedBy
    [
        0x0001, 0x02aa, 0x0004, 0x02a0, 0x0010, 0x02a0, 0x0010, 0x0200, 0x0150, 0x0200, 0x1c00, 0x0800, 0x0800,
    ],
    // Equals
    [
        0x0001, 0x0002, 0x0004, 0x0008, 0x0010, 0x0020, 0x0040, 0x0080, 0x0100, 0x0200, 0x0400, 0x0800, 0x1000,
    ],
];
