/** 6x13 bitmap font for chart labels; rows are LSB-left bitmasks
 * for ASCII 32..126. */

export const GLYPH_WIDTH = 6;
export const GLYPH_HEIGHT = 13;

export const GLYPHS: number[][] = [
  [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0], // ' '
  [0, 0, 2, 2, 2, 2, 2, 0, 0, 2, 0, 0, 0], // '!'
  [0, 0, 6, 6, 6, 0, 0, 0, 0, 0, 0, 0, 0], // '"'
  [0, 0, 20, 12, 12, 30, 10, 30, 10, 6, 0, 0, 0], // '#'
  [0, 8, 28, 42, 42, 14, 24, 40, 42, 28, 8, 0, 0], // '$'
  [0, 0, 14, 42, 42, 30, 48, 40, 36, 36, 0, 0, 0], // '%'
  [0, 0, 28, 2, 34, 60, 34, 34, 34, 60, 0, 0, 0], // '&'
  [0, 0, 2, 2, 2, 0, 0, 0, 0, 0, 0, 0, 0], // "'"
  [0, 0, 4, 2, 2, 2, 2, 2, 2, 4, 4, 0, 0], // '('
  [0, 0, 0, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0], // ')'
  [0, 0, 0, 0, 0, 8, 42, 28, 20, 0, 0, 0, 0], // '*'
  [0, 0, 0, 0, 8, 8, 62, 8, 8, 0, 0, 0, 0], // '+'
  [0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0], // ','
  [0, 0, 0, 0, 0, 0, 3, 0, 0, 0, 0, 0, 0], // '-'
  [0, 0, 0, 0, 0, 0, 0, 0, 0, 2, 0, 0, 0], // '.'
  [0, 0, 2, 2, 1, 1, 1, 0, 0, 0, 0, 0, 0], // '/'
  [0, 0, 28, 54, 34, 34, 34, 34, 54, 28, 0, 0, 0], // '0'
  [0, 0, 12, 10, 8, 8, 8, 8, 8, 8, 0, 0, 0], // '1'
  [0, 0, 12, 18, 16, 16, 8, 4, 2, 31, 0, 0, 0], // '2'
  [0, 0, 14, 17, 16, 12, 16, 17, 17, 14, 0, 0, 0], // '3'
  [0, 0, 16, 24, 20, 20, 18, 63, 16, 16, 0, 0, 0], // '4'
  [0, 0, 30, 1, 1, 13, 19, 16, 17, 14, 0, 0, 0], // '5'
  [0, 0, 28, 36, 34, 30, 34, 34, 34, 28, 0, 0, 0], // '6'
  [0, 0, 31, 16, 8, 8, 4, 4, 2, 2, 0, 0, 0], // '7'
  [0, 0, 28, 34, 34, 28, 34, 34, 34, 28, 0, 0, 0], // '8'
  [0, 0, 28, 34, 34, 34, 60, 34, 18, 28, 0, 0, 0], // '9'
  [0, 0, 0, 0, 2, 0, 0, 0, 0, 2, 0, 0, 0], // ':'
  [0, 0, 0, 0, 2, 0, 0, 0, 0, 2, 1, 0, 0], // ';'
  [0, 0, 0, 0, 0, 24, 6, 2, 12, 16, 0, 0, 0], // '<'
  [0, 0, 0, 0, 0, 30, 0, 30, 0, 0, 0, 0, 0], // '='
  [0, 0, 0, 0, 0, 6, 24, 16, 12, 2, 0, 0, 0], // '>'
  [0, 0, 12, 18, 18, 16, 8, 8, 0, 8, 0, 0, 0], // '?'
  [0, 0, 48, 12, 52, 10, 10, 42, 26, 4, 56, 0, 0], // '@'
  [0, 0, 8, 12, 20, 18, 30, 34, 34, 33, 0, 0, 0], // 'A'
  [0, 0, 30, 34, 34, 18, 62, 34, 34, 30, 0, 0, 0], // 'B'
  [0, 0, 56, 4, 2, 2, 2, 2, 4, 60, 0, 0, 0], // 'C'
  [0, 0, 30, 34, 2, 2, 2, 2, 34, 30, 0, 0, 0], // 'D'
  [0, 0, 62, 2, 2, 2, 30, 2, 2, 62, 0, 0, 0], // 'E'
  [0, 0, 62, 2, 2, 2, 30, 2, 2, 2, 0, 0, 0], // 'F'
  [0, 0, 56, 36, 2, 2, 50, 2, 36, 28, 0, 0, 0], // 'G'
  [0, 0, 2, 2, 2, 2, 62, 2, 2, 2, 0, 0, 0], // 'H'
  [0, 0, 2, 2, 2, 2, 2, 2, 2, 2, 0, 0, 0], // 'I'
  [0, 0, 16, 16, 16, 16, 16, 18, 18, 12, 0, 0, 0], // 'J'
  [0, 0, 34, 18, 10, 10, 14, 10, 18, 34, 0, 0, 0], // 'K'
  [0, 0, 2, 2, 2, 2, 2, 2, 2, 62, 0, 0, 0], // 'L'
  [0, 0, 6, 6, 6, 42, 42, 42, 26, 18, 0, 0, 0], // 'M'
  [0, 0, 38, 38, 38, 42, 42, 42, 50, 50, 0, 0, 0], // 'N'
  [0, 0, 56, 4, 2, 2, 2, 2, 4, 56, 0, 0, 0], // 'O'
  [0, 0, 30, 34, 34, 34, 30, 2, 2, 2, 0, 0, 0], // 'P'
  [0, 0, 56, 4, 2, 2, 2, 2, 4, 56, 0, 0, 0], // 'Q'
  [0, 0, 30, 34, 34, 34, 30, 50, 34, 34, 0, 0, 0], // 'R'
  [0, 0, 28, 34, 2, 4, 56, 32, 34, 28, 0, 0, 0], // 'S'
  [0, 0, 62, 8, 8, 8, 8, 8, 8, 8, 0, 0, 0], // 'T'
  [0, 0, 34, 34, 34, 34, 34, 34, 34, 28, 0, 0, 0], // 'U'
  [0, 0, 33, 34, 34, 18, 20, 20, 12, 8, 0, 0, 0], // 'V'
  [0, 0, 49, 50, 50, 42, 42, 10, 12, 4, 0, 0, 0], // 'W'
  [0, 0, 34, 18, 20, 12, 12, 20, 18, 34, 0, 0, 0], // 'X'
  [0, 0, 34, 34, 20, 20, 8, 8, 8, 8, 0, 0, 0], // 'Y'
  [0, 0, 62, 32, 16, 8, 8, 4, 2, 62, 0, 0, 0], // 'Z'
  [0, 6, 2, 2, 2, 2, 2, 2, 2, 2, 6, 0, 0], // '['
  [0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 0, 0], // 'backslash'
  [0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0], // ']'
  [0, 0, 0, 0, 12, 10, 10, 18, 0, 0, 0, 0, 0], // '^'
  [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 31, 0, 0], // '_'
  [0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0], // '`'
  [0, 0, 0, 0, 28, 18, 24, 22, 18, 30, 0, 0, 0], // 'a'
  [0, 0, 2, 2, 30, 34, 34, 34, 34, 30, 0, 0, 0], // 'b'
  [0, 0, 0, 0, 28, 34, 2, 2, 34, 28, 0, 0, 0], // 'c'
  [0, 0, 32, 32, 60, 34, 34, 34, 34, 60, 0, 0, 0], // 'd'
  [0, 0, 0, 0, 28, 34, 62, 2, 34, 28, 0, 0, 0], // 'e'
  [0, 4, 2, 2, 7, 2, 2, 2, 2, 2, 0, 0, 0], // 'f'
  [0, 0, 0, 0, 60, 34, 34, 34, 34, 60, 34, 28, 0], // 'g'
  [0, 0, 2, 2, 30, 38, 34, 34, 34, 34, 0, 0, 0], // 'h'
  [0, 0, 2, 0, 2, 2, 2, 2, 2, 2, 0, 0, 0], // 'i'
  [0, 0, 2, 0, 2, 2, 2, 2, 2, 2, 2, 3, 0], // 'j'
  [0, 0, 2, 2, 18, 10, 6, 10, 10, 18, 0, 0, 0], // 'k'
  [0, 0, 2, 2, 2, 2, 2, 2, 2, 6, 0, 0, 0], // 'l'
  [0, 0, 0, 0, 46, 18, 18, 18, 18, 18, 0, 0, 0], // 'm'
  [0, 0, 0, 0, 30, 38, 34, 34, 34, 34, 0, 0, 0], // 'n'
  [0, 0, 0, 0, 28, 34, 34, 34, 34, 28, 0, 0, 0], // 'o'
  [0, 0, 0, 0, 30, 34, 34, 34, 34, 30, 2, 2, 0], // 'p'
  [0, 0, 0, 0, 60, 34, 34, 34, 34, 60, 32, 32, 0], // 'q'
  [0, 0, 0, 0, 14, 2, 2, 2, 2, 2, 0, 0, 0], // 'r'
  [0, 0, 0, 0, 14, 18, 6, 24, 18, 30, 0, 0, 0], // 's'
  [0, 0, 2, 2, 7, 2, 2, 2, 2, 6, 0, 0, 0], // 't'
  [0, 0, 0, 0, 34, 34, 34, 34, 50, 60, 0, 0, 0], // 'u'
  [0, 0, 0, 0, 17, 17, 10, 10, 10, 4, 0, 0, 0], // 'v'
  [0, 0, 0, 0, 25, 25, 26, 22, 38, 36, 0, 0, 0], // 'w'
  [0, 0, 0, 0, 4, 5, 2, 3, 5, 4, 0, 0, 0], // 'x'
  [0, 0, 0, 0, 17, 17, 10, 10, 10, 4, 4, 2, 0], // 'y'
  [0, 0, 0, 0, 30, 16, 8, 4, 2, 30, 0, 0, 0], // 'z'
  [0, 6, 2, 2, 2, 2, 2, 2, 2, 2, 6, 0, 0], // '{'
  [0, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 0], // '|'
  [0, 3, 2, 2, 2, 2, 2, 2, 2, 2, 3, 0, 0], // '}'
  [0, 0, 0, 0, 0, 0, 22, 26, 0, 0, 0, 0, 0], // '~'
];

export function glyph(ch: string): number[] {
  const code = ch.charCodeAt(0);
  if (code < 32 || code > 126) return GLYPHS["?".charCodeAt(0) - 32];
  return GLYPHS[code - 32];
}
