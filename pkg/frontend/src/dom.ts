/** Small DOM helpers; the app renders plain elements, no framework. */

type Attrs = Record<string, string | boolean | EventListener>;

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Attrs = {},
  children: Array<Node | string> = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === 'function') {
      node.addEventListener(key.replace(/^on/, ''), value);
    } else if (typeof value === 'boolean') {
      if (value) {
        node.setAttribute(key, '');
      }
      if (key === 'disabled' || key === 'checked') {
        (node as unknown as { disabled?: boolean; checked?: boolean })[key] = value;
      }
    } else {
      node.setAttribute(key, value);
    }
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function clear(node: HTMLElement): void {
  while (node.firstChild) {
    node.removeChild(node.firstChild);
  }
}

export function replaceChildrenOf(node: HTMLElement, ...children: Array<Node | string>): void {
  clear(node);
  node.append(...children);
}

/** Today in the browser's local calendar as YYYY-MM-DD (no UTC drift). */
export function todayIso(): string {
  const d = new Date();
  const month = String(d.getMonth() + 1).padStart(2, '0');
  const day = String(d.getDate()).padStart(2, '0');
  return `${d.getFullYear()}-${month}-${day}`;
}
