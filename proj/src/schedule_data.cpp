#include "nextscale/schedule.hpp"

namespace nextscale::schedule {
namespace {

// Built-in progressive schedules, one per supported aspect ratio,
// listed in ascending ratio order. Each entry walks an 18-step token
// grid progression from 1x1 to the final grid; the nominal pixel
// resolution is the intended decode target for the full schedule.
const std::vector<ScaleSchedule> kBuiltins = {
    {0.250, 1, 4, 512, 2048,
     {{1, 1}, {1, 4}, {2, 6}, {2, 8}, {2, 10}, {3, 12}, {4, 14}, {4, 16}, {5, 20}, {6, 24}, {7, 28}, {8, 32}, {10, 40}, {12, 48}, {14, 56}, {16, 64}, {24, 96}, {32, 128}}},
    {0.260, 13, 50, 544, 2080,
     {{1, 1}, {1, 4}, {2, 6}, {2, 8}, {2, 10}, {3, 12}, {4, 14}, {4, 16}, {5, 19}, {6, 23}, {7, 27}, {8, 31}, {10, 39}, {12, 46}, {14, 54}, {16, 62}, {24, 93}, {32, 124}}},
    {0.267, 4, 15, 576, 2160,
     {{1, 1}, {1, 4}, {2, 6}, {2, 8}, {2, 9}, {3, 11}, {4, 13}, {4, 15}, {5, 19}, {6, 22}, {7, 26}, {8, 30}, {10, 38}, {12, 45}, {14, 52}, {16, 60}, {24, 90}, {32, 120}}},
    {0.276, 10, 36, 576, 2088,
     {{1, 1}, {1, 4}, {2, 5}, {2, 7}, {2, 9}, {3, 11}, {4, 13}, {4, 14}, {5, 18}, {6, 22}, {7, 25}, {8, 29}, {10, 36}, {12, 44}, {14, 51}, {16, 58}, {24, 87}, {32, 116}}},
    {0.295, 11, 37, 592, 1984,
     {{1, 1}, {1, 4}, {2, 5}, {2, 7}, {3, 9}, {3, 10}, {4, 12}, {4, 14}, {6, 18}, {7, 21}, {8, 24}, {9, 28}, {11, 35}, {14, 42}, {16, 49}, {18, 56}, {27, 84}, {36, 112}}},
    {0.311, 9, 29, 624, 2001,
     {{1, 1}, {1, 3}, {2, 5}, {2, 6}, {3, 8}, {3, 10}, {4, 11}, {4, 13}, {6, 16}, {7, 20}, {8, 23}, {9, 26}, {11, 32}, {14, 39}, {16, 46}, {18, 52}, {27, 78}, {36, 104}}},
    {0.333, 1, 3, 576, 1728,
     {{1, 1}, {1, 3}, {2, 5}, {2, 7}, {3, 8}, {3, 10}, {4, 12}, {4, 14}, {6, 17}, {7, 20}, {8, 24}, {9, 27}, {11, 34}, {14, 40}, {16, 47}, {18, 54}, {27, 81}, {36, 108}}},
    {0.345, 10, 29, 640, 1856,
     {{1, 1}, {1, 3}, {2, 5}, {2, 6}, {3, 8}, {4, 9}, {4, 11}, {5, 12}, {6, 16}, {8, 19}, {9, 22}, {10, 25}, {12, 31}, {15, 38}, {18, 44}, {20, 50}, {30, 75}, {40, 100}}},
    {0.417, 5, 12, 800, 1920,
     {{1, 1}, {1, 3}, {2, 4}, {2, 6}, {3, 8}, {4, 9}, {4, 10}, {5, 12}, {6, 15}, {8, 18}, {9, 21}, {10, 24}, {12, 30}, {15, 36}, {18, 42}, {20, 48}, {30, 72}, {40, 96}}},
    {0.478, 11, 23, 880, 1840,
     {{1, 1}, {1, 3}, {2, 4}, {3, 6}, {3, 7}, {4, 9}, {5, 10}, {6, 12}, {7, 14}, {8, 17}, {10, 20}, {11, 23}, {14, 29}, {16, 34}, {19, 40}, {22, 46}, {33, 69}, {44, 92}}},
    {0.500, 1, 2, 880, 1760,
     {{1, 1}, {1, 3}, {2, 4}, {3, 6}, {3, 7}, {4, 8}, {5, 10}, {6, 11}, {7, 14}, {8, 16}, {10, 19}, {11, 22}, {14, 28}, {16, 33}, {19, 38}, {22, 44}, {33, 66}, {44, 88}}},
    {0.524, 11, 21, 896, 1709,
     {{1, 1}, {1, 3}, {2, 4}, {3, 5}, {3, 7}, {4, 8}, {5, 9}, {6, 10}, {7, 13}, {8, 16}, {10, 18}, {11, 21}, {14, 26}, {16, 32}, {19, 37}, {22, 42}, {33, 63}, {44, 84}}},
    {0.571, 4, 7, 896, 1568,
     {{1, 1}, {2, 3}, {2, 4}, {3, 5}, {4, 7}, {4, 8}, {5, 9}, {6, 10}, {8, 13}, {9, 16}, {10, 18}, {12, 21}, {15, 26}, {18, 32}, {21, 37}, {24, 42}, {36, 63}, {48, 84}}},
    {0.600, 3, 5, 960, 1600,
     {{1, 1}, {2, 2}, {2, 4}, {3, 5}, {4, 6}, {4, 8}, {5, 9}, {6, 10}, {8, 12}, {9, 15}, {10, 18}, {12, 20}, {15, 25}, {18, 30}, {21, 35}, {24, 40}, {36, 60}, {48, 80}}},
    {0.685, 13, 19, 816, 1192,
     {{1, 1}, {2, 2}, {2, 4}, {3, 5}, {4, 6}, {5, 7}, {6, 8}, {6, 10}, {8, 12}, {10, 14}, {11, 17}, {13, 19}, {16, 24}, {20, 28}, {23, 33}, {26, 38}, {39, 57}, {52, 76}}},
    {0.722, 13, 18, 864, 1196,
     {{1, 1}, {2, 2}, {2, 3}, {3, 4}, {4, 6}, {5, 7}, {6, 8}, {6, 9}, {8, 11}, {10, 14}, {11, 16}, {13, 18}, {16, 22}, {20, 27}, {23, 32}, {26, 36}, {39, 54}, {52, 72}}},
    {0.781, 25, 32, 992, 1270,
     {{1, 1}, {2, 2}, {3, 3}, {4, 4}, {4, 6}, {5, 7}, {6, 8}, {7, 9}, {9, 11}, {10, 14}, {12, 16}, {14, 18}, {18, 22}, {21, 27}, {24, 32}, {28, 36}, {42, 54}, {56, 72}}},
    {0.824, 14, 17, 1008, 1224,
     {{1, 1}, {2, 2}, {3, 3}, {4, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 8}, {9, 11}, {10, 13}, {12, 15}, {14, 17}, {18, 21}, {21, 26}, {24, 30}, {28, 34}, {42, 51}, {56, 68}}},
    {0.882, 15, 17, 960, 1088,
     {{1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}, {6, 6}, {7, 7}, {8, 8}, {9, 11}, {11, 13}, {13, 15}, {15, 17}, {19, 21}, {22, 26}, {26, 30}, {30, 34}, {45, 51}, {60, 68}}},
    {0.937, 15, 16, 960, 1024,
     {{1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}, {6, 6}, {7, 7}, {8, 8}, {9, 10}, {11, 12}, {13, 14}, {15, 16}, {19, 20}, {22, 24}, {26, 28}, {30, 32}, {45, 48}, {60, 64}}},
    {1.000, 1, 1, 1024, 1024,
     {{1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}, {6, 6}, {7, 7}, {8, 8}, {10, 10}, {12, 12}, {14, 14}, {16, 16}, {20, 20}, {24, 24}, {28, 28}, {32, 32}, {48, 48}, {64, 64}}},
    {1.067, 16, 15, 1024, 960,
     {{1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}, {6, 6}, {7, 7}, {8, 8}, {10, 9}, {12, 11}, {14, 13}, {16, 15}, {20, 19}, {24, 22}, {28, 26}, {32, 30}, {48, 45}, {64, 60}}},
    {1.133, 17, 15, 1088, 960,
     {{1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}, {6, 6}, {7, 7}, {8, 8}, {11, 9}, {13, 11}, {15, 13}, {17, 15}, {21, 19}, {26, 22}, {30, 26}, {34, 30}, {51, 45}, {68, 60}}},
    {1.214, 17, 14, 1224, 1008,
     {{1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 4}, {6, 5}, {7, 6}, {8, 7}, {11, 9}, {13, 10}, {15, 12}, {17, 14}, {21, 18}, {26, 21}, {30, 24}, {34, 28}, {51, 42}, {68, 56}}},
    {1.286, 9, 7, 1270, 992,
     {{1, 1}, {2, 2}, {3, 3}, {4, 4}, {6, 4}, {7, 5}, {8, 6}, {9, 7}, {11, 9}, {14, 10}, {16, 12}, {18, 14}, {22, 18}, {27, 21}, {32, 24}, {36, 28}, {54, 42}, {72, 56}}},
    {1.385, 18, 13, 1196, 864,
     {{1, 1}, {2, 2}, {3, 2}, {4, 3}, {6, 4}, {7, 5}, {8, 6}, {9, 6}, {11, 8}, {14, 10}, {16, 11}, {18, 13}, {22, 16}, {27, 20}, {32, 23}, {36, 26}, {54, 39}, {72, 52}}},
    {1.462, 19, 13, 1192, 816,
     {{1, 1}, {2, 2}, {4, 2}, {5, 3}, {6, 4}, {7, 5}, {8, 6}, {10, 6}, {12, 8}, {14, 10}, {17, 11}, {19, 13}, {24, 16}, {28, 20}, {33, 23}, {38, 26}, {57, 39}, {76, 52}}},
    {1.667, 5, 3, 1600, 960,
     {{1, 1}, {2, 2}, {4, 2}, {5, 3}, {6, 4}, {8, 4}, {9, 5}, {10, 6}, {12, 8}, {15, 9}, {18, 10}, {20, 12}, {25, 15}, {30, 18}, {35, 21}, {40, 24}, {60, 36}, {80, 48}}},
    {1.750, 7, 4, 1568, 896,
     {{1, 1}, {3, 2}, {4, 2}, {5, 3}, {7, 4}, {8, 4}, {9, 5}, {10, 6}, {13, 8}, {16, 9}, {18, 10}, {21, 12}, {26, 15}, {32, 18}, {37, 21}, {42, 24}, {63, 36}, {84, 48}}},
    {1.909, 21, 11, 1709, 896,
     {{1, 1}, {3, 1}, {4, 2}, {5, 3}, {7, 3}, {8, 4}, {9, 5}, {10, 6}, {13, 7}, {16, 8}, {18, 10}, {21, 11}, {26, 14}, {32, 16}, {37, 19}, {42, 22}, {63, 33}, {84, 44}}},
    {2.000, 2, 1, 1760, 880,
     {{1, 1}, {3, 1}, {4, 2}, {6, 3}, {7, 3}, {8, 4}, {10, 5}, {11, 6}, {14, 7}, {16, 8}, {19, 10}, {22, 11}, {28, 14}, {33, 16}, {38, 19}, {44, 22}, {66, 33}, {88, 44}}},
    {2.091, 23, 11, 1840, 880,
     {{1, 1}, {3, 1}, {4, 2}, {6, 3}, {7, 3}, {9, 4}, {10, 5}, {12, 6}, {14, 7}, {17, 8}, {20, 10}, {23, 11}, {29, 14}, {34, 16}, {40, 19}, {46, 22}, {69, 33}, {92, 44}}},
    {2.400, 12, 5, 1920, 800,
     {{1, 1}, {3, 1}, {4, 2}, {6, 2}, {8, 3}, {9, 4}, {10, 4}, {12, 5}, {15, 6}, {18, 8}, {21, 9}, {24, 10}, {30, 12}, {36, 15}, {42, 18}, {48, 20}, {72, 30}, {96, 40}}},
    {2.500, 5, 2, 1856, 640,
     {{1, 1}, {3, 1}, {5, 2}, {6, 2}, {8, 3}, {9, 4}, {11, 4}, {12, 5}, {16, 6}, {19, 8}, {22, 9}, {25, 10}, {31, 12}, {38, 15}, {44, 18}, {50, 20}, {75, 30}, {100, 40}}},
    {2.889, 26, 9, 2001, 624,
     {{1, 1}, {3, 1}, {5, 2}, {6, 2}, {8, 3}, {10, 3}, {11, 4}, {13, 4}, {16, 6}, {20, 7}, {23, 8}, {26, 9}, {32, 11}, {39, 14}, {46, 16}, {52, 18}, {78, 27}, {104, 36}}},
    {3.000, 3, 1, 1728, 576,
     {{1, 1}, {3, 1}, {5, 2}, {7, 2}, {8, 3}, {10, 3}, {12, 4}, {14, 4}, {17, 6}, {20, 7}, {24, 8}, {27, 9}, {34, 11}, {40, 14}, {47, 16}, {54, 18}, {81, 27}, {108, 36}}},
    {3.111, 28, 9, 1984, 592,
     {{1, 1}, {4, 1}, {5, 2}, {7, 2}, {9, 3}, {10, 3}, {12, 4}, {14, 4}, {18, 6}, {21, 7}, {24, 8}, {28, 9}, {35, 11}, {42, 14}, {49, 16}, {56, 18}, {84, 27}, {112, 36}}},
    {3.625, 29, 8, 2088, 576,
     {{1, 1}, {4, 1}, {5, 2}, {7, 2}, {9, 2}, {11, 3}, {13, 4}, {14, 4}, {18, 5}, {22, 6}, {25, 7}, {29, 8}, {36, 10}, {44, 12}, {51, 14}, {58, 16}, {87, 24}, {116, 32}}},
    {3.750, 15, 4, 2160, 576,
     {{1, 1}, {4, 1}, {6, 2}, {8, 2}, {9, 2}, {11, 3}, {13, 4}, {15, 4}, {19, 5}, {22, 6}, {26, 7}, {30, 8}, {38, 10}, {45, 12}, {52, 14}, {60, 16}, {90, 24}, {120, 32}}},
    {3.875, 31, 8, 2080, 544,
     {{1, 1}, {4, 1}, {6, 2}, {8, 2}, {10, 2}, {12, 3}, {14, 4}, {16, 4}, {19, 5}, {23, 6}, {27, 7}, {31, 8}, {39, 10}, {46, 12}, {54, 14}, {62, 16}, {93, 24}, {124, 32}}},
    {4.000, 4, 1, 2048, 512,
     {{1, 1}, {4, 1}, {6, 2}, {8, 2}, {10, 2}, {12, 3}, {14, 4}, {16, 4}, {20, 5}, {24, 6}, {28, 7}, {32, 8}, {40, 10}, {48, 12}, {56, 14}, {64, 16}, {96, 24}, {128, 32}}},
};

}  // namespace

const std::vector<ScaleSchedule>& builtin_schedules() { return kBuiltins; }

}  // namespace nextscale::schedule
