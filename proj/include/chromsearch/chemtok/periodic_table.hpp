#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace chromsearch::chemtok {

struct ElementInfo {
  int atomic_number;
  std::string_view symbol;
  std::string_view name;
};

inline constexpr std::array<ElementInfo, 118> kPeriodicTable{{
    {1, "H", "hydrogen"},       {2, "He", "helium"},        {3, "Li", "lithium"},
    {4, "Be", "beryllium"},     {5, "B", "boron"},          {6, "C", "carbon"},
    {7, "N", "nitrogen"},       {8, "O", "oxygen"},         {9, "F", "fluorine"},
    {10, "Ne", "neon"},         {11, "Na", "sodium"},       {12, "Mg", "magnesium"},
    {13, "Al", "aluminium"},    {14, "Si", "silicon"},      {15, "P", "phosphorus"},
    {16, "S", "sulfur"},        {17, "Cl", "chlorine"},     {18, "Ar", "argon"},
    {19, "K", "potassium"},     {20, "Ca", "calcium"},      {21, "Sc", "scandium"},
    {22, "Ti", "titanium"},     {23, "V", "vanadium"},      {24, "Cr", "chromium"},
    {25, "Mn", "manganese"},    {26, "Fe", "iron"},         {27, "Co", "cobalt"},
    {28, "Ni", "nickel"},       {29, "Cu", "copper"},       {30, "Zn", "zinc"},
    {31, "Ga", "gallium"},      {32, "Ge", "germanium"},    {33, "As", "arsenic"},
    {34, "Se", "selenium"},     {35, "Br", "bromine"},      {36, "Kr", "krypton"},
    {37, "Rb", "rubidium"},     {38, "Sr", "strontium"},    {39, "Y", "yttrium"},
    {40, "Zr", "zirconium"},    {41, "Nb", "niobium"},      {42, "Mo", "molybdenum"},
    {43, "Tc", "technetium"},   {44, "Ru", "ruthenium"},    {45, "Rh", "rhodium"},
    {46, "Pd", "palladium"},    {47, "Ag", "silver"},       {48, "Cd", "cadmium"},
    {49, "In", "indium"},       {50, "Sn", "tin"},          {51, "Sb", "antimony"},
    {52, "Te", "tellurium"},    {53, "I", "iodine"},        {54, "Xe", "xenon"},
    {55, "Cs", "caesium"},      {56, "Ba", "barium"},       {57, "La", "lanthanum"},
    {58, "Ce", "cerium"},       {59, "Pr", "praseodymium"}, {60, "Nd", "neodymium"},
    {61, "Pm", "promethium"},   {62, "Sm", "samarium"},     {63, "Eu", "europium"},
    {64, "Gd", "gadolinium"},   {65, "Tb", "terbium"},      {66, "Dy", "dysprosium"},
    {67, "Ho", "holmium"},      {68, "Er", "erbium"},       {69, "Tm", "thulium"},
    {70, "Yb", "ytterbium"},    {71, "Lu", "lutetium"},     {72, "Hf", "hafnium"},
    {73, "Ta", "tantalum"},     {74, "W", "tungsten"},      {75, "Re", "rhenium"},
    {76, "Os", "osmium"},       {77, "Ir", "iridium"},      {78, "Pt", "platinum"},
    {79, "Au", "gold"},         {80, "Hg", "mercury"},      {81, "Tl", "thallium"},
    {82, "Pb", "lead"},         {83, "Bi", "bismuth"},      {84, "Po", "polonium"},
    {85, "At", "astatine"},     {86, "Rn", "radon"},        {87, "Fr", "francium"},
    {88, "Ra", "radium"},       {89, "Ac", "actinium"},     {90, "Th", "thorium"},
    {91, "Pa", "protactinium"}, {92, "U", "uranium"},       {93, "Np", "neptunium"},
    {94, "Pu", "plutonium"},    {95, "Am", "americium"},    {96, "Cm", "curium"},
    {97, "Bk", "berkelium"},    {98, "Cf", "californium"},  {99, "Es", "einsteinium"},
    {100, "Fm", "fermium"},     {101, "Md", "mendelevium"}, {102, "No", "nobelium"},
    {103, "Lr", "lawrencium"},  {104, "Rf", "rutherfordium"}, {105, "Db", "dubnium"},
    {106, "Sg", "seaborgium"},  {107, "Bh", "bohrium"},     {108, "Hs", "hassium"},
    {109, "Mt", "meitnerium"},  {110, "Ds", "darmstadtium"}, {111, "Rg", "roentgenium"},
    {112, "Cn", "copernicium"}, {113, "Nh", "nihonium"},    {114, "Fl", "flerovium"},
    {115, "Mc", "moscovium"},   {116, "Lv", "livermorium"}, {117, "Ts", "tennessine"},
    {118, "Og", "oganesson"},
}};

inline std::optional<ElementInfo> find_element(std::string_view symbol) {
  for (const auto& e : kPeriodicTable) {
    if (e.symbol == symbol) return e;
  }
  return std::nullopt;
}

inline bool is_element_symbol(std::string_view symbol) { return find_element(symbol).has_value(); }

}  // namespace chromsearch::chemtok
