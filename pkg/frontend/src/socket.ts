// Websocket plumbing: validates every inbound frame against the schema
// and hands it to the view model; outbound control messages are plain
// JSON. A message sent while disconnected is queued once, after which
// the user sees a banner instead of silent loss.

import { parseServerMessage, type ClientMessage } from "./schema.js";
import { onMessage, type ViewModel } from "./viewmodel.js";

export interface Connection {
  send(msg: ClientMessage): void;
  close(): void;
}

export function connect(
  url: string,
  vm: ViewModel,
  onChange: () => void,
): Connection {
  const ws = new WebSocket(url);
  let queued: ClientMessage | null = null;

  ws.onopen = () => {
    vm.status = "open";
    if (queued !== null) {
      ws.send(JSON.stringify(queued));
      queued = null;
    }
    onChange();
  };
  ws.onclose = () => {
    vm.status = "closed";
    onChange();
  };
  ws.onmessage = (ev: MessageEvent) => {
    const msg = parseServerMessage(String(ev.data));
    if (msg === null) {
      vm.banner = "received a frame that does not match the schema";
    } else {
      onMessage(vm, msg);
    }
    onChange();
  };

  return {
    send(msg: ClientMessage) {
      if (ws.readyState === WebSocket.OPEN) {
        ws.send(JSON.stringify(msg));
      } else if (queued === null) {
        queued = msg;
      } else {
        vm.banner = "not connected — control dropped";
        onChange();
      }
    },
    close() {
      ws.close();
    },
  };
}

/** Socket endpoint: `?ws=` query parameter, else same-host default. */
export function endpointFromLocation(loc: Location): string {
  const param = new URLSearchParams(loc.search).get("ws");
  if (param) return param;
  const proto = loc.protocol === "https:" ? "wss:" : "ws:";
  return `${proto}//${loc.host}/ws`;
}
