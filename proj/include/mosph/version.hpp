#ifndef MOSPH_VERSION_HPP
#define MOSPH_VERSION_HPP

namespace mosph
{
inline constexpr const char *version_string = "mosph 0.1.0";
}
#endif // MOSPH_VERSION_HPP
