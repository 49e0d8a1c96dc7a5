#pragma once

// Generated by tools/make_glyphs.py; do not edit.

#include <array>
#include <string_view>

namespace crte::glyphs {

inline constexpr int size = 64;

inline constexpr std::array<std::string_view, size> A = {
    "................................................................",
    "................................................................",
    "................................................................",
    "................................................................",
    ".............................######.............................",
    "............................########............................",
    "............................########............................",
    "............................########............................",
    "...........................##########...........................",
    "...........................##########...........................",
    "..........................############..........................",
    "..........................############..........................",
    ".........................##############.........................",
    ".........................##############.........................",
    "........................################........................",
    "........................################........................",
    ".......................##################.......................",
    ".......................##################.......................",
    ".......................##################.......................",
    "......................#########..#########......................",
    "......................#########..#########......................",
    ".....................#########....#########.....................",
    ".....................#########....#########.....................",
    "....................#########......#########....................",
    "....................#########......#########....................",
    "...................##########......##########...................",
    "...................#########........#########...................",
    "...................#########........#########...................",
    "..................#########..........#########..................",
    "..................#########..........#########..................",
    ".................#########............#########.................",
    ".................#########............#########.................",
    "................#########..............#########................",
    "................#########..............#########................",
    "...............##################################...............",
    "...............##################################...............",
    "...............##################################...............",
    "..............####################################..............",
    "..............####################################..............",
    ".............######################################.............",
    ".............######################################.............",
    "............########################################............",
    "............########################################............",
    "...........#########........................#########...........",
    "...........#########........................#########...........",
    "..........##########........................##########..........",
    "..........#########..........................#########..........",
    "..........#########..........................#########..........",
    ".........#########............................#########.........",
    ".........#########............................#########.........",
    "........#########..............................#########........",
    "........#########..............................#########........",
    ".......#########................................#########.......",
    ".......#########................................#########.......",
    "......##########................................##########......",
    "......#########..................................#########......",
    "......#########..................................#########......",
    ".....#########....................................#########.....",
    "......########....................................########......",
    "......#######......................................#######......",
    ".......######......................................######.......",
    "........###..........................................###........",
    "................................................................",
    "................................................................",
};

inline constexpr std::array<std::string_view, size> Omega = {
    "................................................................",
    "................................................................",
    "................................................................",
    "................................................................",
    "................................................................",
    "................................................................",
    "..........................############..........................",
    ".......................##################.......................",
    ".....................######################.....................",
    "...................##########################...................",
    "..................############################..................",
    ".................##############################.................",
    "................################################................",
    "...............################..################...............",
    "..............############............############..............",
    ".............###########................###########.............",
    ".............##########..................##########.............",
    "............##########....................##########............",
    "...........##########......................##########...........",
    "...........#########........................#########...........",
    "...........########..........................########...........",
    "..........########............................########..........",
    "..........########............................########..........",
    "..........########............................########..........",
    ".........########..............................########.........",
    ".........########..............................########.........",
    ".........########..............................########.........",
    ".........########..............................########.........",
    ".........########..............................########.........",
    ".........########..............................########.........",
    ".........########..............................########.........",
    ".........########..............................########.........",
    ".........########..............................########.........",
    ".........########..............................########.........",
    "..........########............................########..........",
    "..........########............................########..........",
    "..........#########..........................#########..........",
    "...........########..........................########...........",
    "...........#########........................#########...........",
    "............#########......................#########............",
    "............##########....................##########............",
    ".............##########..................##########.............",
    "..............###########..............###########..............",
    "..............###########..............###########..............",
    "...............###########............###########...............",
    "................##########............##########................",
    ".................#########............#########.................",
    "..................########............########..................",
    "..................########............########..................",
    "..................########............########..................",
    "..................########............########..................",
    "..................########............########..................",
    ".......###################............###################.......",
    ".....#####################............#####################.....",
    "....######################............######################....",
    "....######################............######################....",
    "....######################............######################....",
    "....#####################..............#####################....",
    ".....####################..............####################.....",
    "......##################................##################......",
    "................................................................",
    "................................................................",
    "................................................................",
    "................................................................",
};

inline constexpr std::array<std::string_view, size> S = {
    "................................................................",
    "................................................................",
    "................................................................",
    "................................................................",
    "...........................##########...........................",
    ".........................##############.........................",
    ".......................##################.......................",
    "......................####################......................",
    ".....................######################.....................",
    "....................########################....................",
    "...................##########################...................",
    "..................############################..................",
    "..................##########........##########..................",
    ".................##########..........##########.................",
    ".................#########............#########.................",
    ".................########..............########.................",
    "................########................#######.................",
    "................########................#######.................",
    "................########.................#####..................",
    "................########...................#....................",
    "................########........................................",
    "................########........................................",
    "................########........................................",
    "................#########.......................................",
    ".................########.......................................",
    ".................#########......................................",
    ".................##########.....................................",
    "..................###########...................................",
    "...................################.............................",
    "...................###################..........................",
    "....................####################........................",
    ".....................#####################......................",
    "......................#####################.....................",
    "........................####################....................",
    "..........................###################...................",
    ".............................################...................",
    "...................................###########..................",
    ".....................................##########.................",
    "......................................#########.................",
    ".......................................########.................",
    ".......................................#########................",
    "........................................########................",
    "........................................########................",
    "........................................########................",
    "....................#...................########................",
    "..................#####.................########................",
    ".................#######................########................",
    ".................#######................########................",
    ".................########..............########.................",
    ".................#########............#########.................",
    ".................##########..........##########.................",
    "..................##########........##########..................",
    "..................############################..................",
    "...................##########################...................",
    "....................########################....................",
    ".....................######################.....................",
    "......................####################......................",
    ".......................##################.......................",
    ".........................##############.........................",
    "...........................##########...........................",
    "................................................................",
    "................................................................",
    "................................................................",
    "................................................................",
};

inline constexpr std::array<std::string_view, size> Z = {
    "................................................................",
    "................................................................",
    "................................................................",
    "................................................................",
    "................................................................",
    "........################################################........",
    ".......##################################################.......",
    "......####################################################......",
    "......####################################################......",
    "......####################################################......",
    "......####################################################......",
    ".......##################################################.......",
    "........################################################........",
    ".............................................##########.........",
    "............................................##########..........",
    "...........................................##########...........",
    "..........................................###########...........",
    ".........................................###########............",
    "........................................###########.............",
    ".......................................###########..............",
    "......................................###########...............",
    ".....................................###########................",
    "....................................###########.................",
    "...................................###########..................",
    "..................................###########...................",
    ".................................###########....................",
    ".................................##########.....................",
    "................................##########......................",
    "...............................##########.......................",
    "..............................##########........................",
    ".............................##########.........................",
    "............................##########..........................",
    "...........................##########...........................",
    "..........................##########............................",
    ".........................###########............................",
    "........................###########.............................",
    ".......................###########..............................",
    "......................###########...............................",
    ".....................###########................................",
    "....................###########.................................",
    "...................###########..................................",
    "..................###########...................................",
    ".................###########....................................",
    "................###########.....................................",
    "...............###########......................................",
    "...............##########.......................................",
    "..............##########........................................",
    ".............##########.........................................",
    "............##########..........................................",
    "...........##########...........................................",
    "..........##########............................................",
    ".........##########.............................................",
    "........###############################################.........",
    ".......##################################################.......",
    "......####################################################......",
    "......####################################################......",
    "......####################################################......",
    "......####################################################......",
    "......####################################################......",
    ".......##################################################.......",
    "................................................................",
    "................................................................",
    "................................................................",
    "................................................................",
};

} // namespace crte::glyphs
